//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use osp_core::config::{PhysicalParams, Provenance, RenormConstants};
use osp_core::decompositions::classical_decomposition;
use osp_core::greens::{delta_max_exact, h_bound_closed, tree_scale_exact, EnvelopeEvaluator, EnvelopeMode};
use osp_core::ospforms::matrix::{assemble_osp_matrix_with, psd_check, Cell};
use osp_core::ospforms::{
    check_osp_small_n_with, closed_lower_bounds, radial_integral_4d, scalar_integrals, QuadratureScheme, TestFunction,
};
use osp_core::partitions::{enumerate_odd_profiles, enumerate_set_partitions_odd, set_partition_count, OddProfile};
use osp_core::verifier::report::to_json;
use osp_core::verifier::{run_scan, ScanSpec};
use osp_core::{Execution, SplittingBounds};

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget_secs: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < budget_secs, || {
        format!("{what} took {:.3} s, budget {budget_secs} s", elapsed.as_secs_f64())
    })
}

/// Interior points `k / (6 (points + 1))` of `(0, 1/6)`.
fn interior_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|k| k as f64 / (6.0 * (points + 1) as f64)).collect()
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let mut total = 0usize;
    for n in (1..=11).step_by(2) {
        let mut seen: BTreeMap<OddProfile, BigUint> = BTreeMap::new();
        for sp in enumerate_set_partitions_odd(n).map_err(|e| e.to_string())? {
            *seen.entry(sp.profile().clone()).or_insert_with(BigUint::zero) += 1u32;
            total += 1;
        }
        let profiles = enumerate_odd_profiles(n, None).map_err(|e| e.to_string())?;
        ensure(profiles.len() == seen.len(), || format!("n={n}: profile sets differ"))?;
        for p in profiles {
            let counted = seen.get(&p).cloned().unwrap_or_default();
            ensure(set_partition_count(&p) == counted, || {
                format!("n={n} {p}: formula {} vs enumeration {counted}", set_partition_count(&p))
            })?;
        }
    }
    within(start.elapsed(), 5.0, "enumeration")?;
    Ok(format!("{total} odd-block set partitions, n <= 11, {:.2} s", start.elapsed().as_secs_f64()))
}

fn ac2() -> Outcome {
    let sum = classical_decomposition(5).map_err(|e| e.to_string())?;
    let p = OddProfile::new(vec![3, 1, 1]).map_err(|e| e.to_string())?;
    let c = sum.get(&p);
    ensure(c == int(10), || format!("coefficient of (3,1,1) is {c}"))?;
    let ones = OddProfile::new(vec![1; 5]).map_err(|e| e.to_string())?;
    Ok(format!("(3,1,1) -> 10; (1,1,1,1,1) -> {} (audited, not asserted)", sum.get(&ones)))
}

fn ac3() -> Outcome {
    let start = Instant::now();
    let zero = RenormConstants::default();
    // each constant that enters delta_max, alone and together
    let positive = [
        RenormConstants { rho0: 0.1, ..zero },
        RenormConstants { a0: 0.5, ..zero },
        RenormConstants { d0: 0.01, ..zero },
        RenormConstants { a0: 0.3, rho0: 0.2, d0: 1e-3, n3_val: 0.5, n3_deriv: 0.5 },
    ];
    let n3_only = RenormConstants { n3_val: 1.0, n3_deriv: 1.0, ..zero };
    let mut comparisons = 0;
    let mut n3_equalities = 0;
    for lambda in interior_grid(100) {
        for n in (5..=99).step_by(2) {
            let cap = tree_scale_exact(n, lambda);
            let dz = delta_max_exact(n, lambda, &zero).map_err(|e| e.to_string())?;
            ensure(dz <= cap, || format!("n={n} lambda={lambda}: zero constants exceed the cap"))?;
            for c in &positive {
                let d = delta_max_exact(n, lambda, c).map_err(|e| e.to_string())?;
                ensure(d < cap, || format!("n={n} lambda={lambda} {c:?}: not strict"))?;
                comparisons += 1;
            }
            if delta_max_exact(n, lambda, &n3_only).map_err(|e| e.to_string())? == cap {
                n3_equalities += 1;
            }
        }
    }
    within(start.elapsed(), 1.0, "exact comparison")?;
    Ok(format!(
        "{comparisons} strict exact comparisons in {:.2} s; n3_val/n3_deriv alone leave equality \
         ({n3_equalities} cases), as they do not enter delta_max",
        start.elapsed().as_secs_f64()
    ))
}

fn ac4() -> Outcome {
    let mut worst: f64 = 0.0;
    for lambda in [0.01, 0.04, 0.1, 0.16] {
        let ev = EnvelopeEvaluator::new(PhysicalParams::new(lambda, 1.0).unwrap(), RenormConstants::default(), 13);
        for n in (3..=13).step_by(2) {
            let momenta = vec![osp_core::Momentum4::zero(); n as usize];
            let rec = ev.h_bound_recursive(n, &momenta, EnvelopeMode::Min).map_err(|e| e.to_string())?;
            let closed = h_bound_closed(n, ev.bounds()).map_err(|e| e.to_string())?;
            let rel = ((rec - closed) / closed).abs();
            worst = worst.max(rel);
            ensure(rel <= 1e-12, || format!("n={n} lambda={lambda}: relative difference {rel:e}"))?;
        }
    }
    Ok(format!("max relative difference {worst:e}"))
}

fn ac5() -> Outcome {
    let p0 = PhysicalParams::new(0.01, 1.0).unwrap();
    let mut slowest = Duration::ZERO;
    let mut min_rel_margin = f64::INFINITY;
    for k in 1..=16 {
        let lambda = 0.01 * f64::from(k);
        let params = p0.with_lambda(lambda).unwrap();
        let bounds = SplittingBounds::build(&params, &RenormConstants::default(), 5);
        for n in [1u32, 3, 5] {
            let start = Instant::now();
            let ints = scalar_integrals(
                &TestFunction::unit_gaussian(),
                &params,
                EnvelopeMode::Min,
                &QuadratureScheme::default(),
            )
            .map_err(|e| e.to_string())?;
            let r = check_osp_small_n_with(n, &ints, &bounds).map_err(|e| e.to_string())?;
            let elapsed = start.elapsed();
            slowest = slowest.max(elapsed);
            within(elapsed, 1.0, &format!("n={n} lambda={lambda}"))?;
            if n == 1 {
                ensure(r.lhs >= 0.0, || format!("lambda={lambda}: n=1 form {}", r.lhs))?;
            } else {
                ensure(r.margin >= -1e-8 * r.scale, || {
                    format!("n={n} lambda={lambda}: margin {:e}, scale {:e}", r.margin, r.scale)
                })?;
                min_rel_margin = min_rel_margin.min(r.margin / r.scale);
            }
        }
    }
    Ok(format!("48 checks, smallest relative margin {min_rel_margin:e}, slowest {:.1} ms", slowest.as_secs_f64() * 1e3))
}

fn ac6() -> Outcome {
    let start = Instant::now();
    let sets =
        [RenormConstants::default(), RenormConstants { a0: 0.3, rho0: 0.2, d0: 1e-3, n3_val: 0.5, n3_deriv: 0.5 }];
    let mut min_h = f64::INFINITY;
    for constants in &sets {
        for lambda in interior_grid(100) {
            let params = PhysicalParams::new(lambda, 1.0).unwrap();
            let bounds = SplittingBounds::build(&params, constants, 13);
            let floor = 1.0 - 6.0 * lambda;
            let floor_exact = int(1) - int(6) * rat(lambda);
            for n in (7..=13).step_by(2) {
                let t = closed_lower_bounds(n, &bounds).map_err(|e| e.to_string())?;
                ensure(t.h > 0.0 && t.h_hat > 0.0, || format!("n={n} lambda={lambda}: h={} h_hat={}", t.h, t.h_hat))?;
                ensure(t.h_bracket >= floor && t.h_hat_bracket >= floor, || {
                    format!("n={n} lambda={lambda}: bracket below 1 - 6 lambda")
                })?;
                for m in [n - 2, n] {
                    let nn = int(u64::from(m) * u64::from(m - 1));
                    let d = delta_max_exact(m, lambda, constants).map_err(|e| e.to_string())?;
                    let bracket = BigRational::one() - int(2) * d / nn;
                    ensure(bracket >= floor_exact, || format!("exact bracket at m={m} lambda={lambda}"))?;
                }
                min_h = min_h.min(t.h).min(t.h_hat);
            }
        }
    }
    within(start.elapsed(), 1.0, "bound evaluation")?;
    Ok(format!("800 (n, lambda, constants) points, smallest bound {min_h:e}"))
}

fn ac7() -> Outcome {
    let sixth = BigRational::new(BigInt::from(1), BigInt::from(6));
    let factor = |l: &BigRational| BigRational::one() - int(6) * l;
    ensure(factor(&sixth).is_zero(), || "factor nonzero at 1/6".into())?;
    let eps = BigRational::new(BigInt::from(1), BigInt::from(10u64.pow(15)));
    ensure(factor(&(&sixth - &eps)) > BigRational::zero(), || "factor not positive below 1/6".into())?;
    ensure(factor(&(&sixth + &eps)) < BigRational::zero(), || "factor not negative above 1/6".into())?;

    let spec = ScanSpec { lambda_min: 0.001, lambda_max: 0.3, steps: 1000, n_max: 3, ..Default::default() };
    let report = run_scan(&spec, &Provenance::default(), Execution::default()).map_err(|e| e.to_string())?;
    let t = report.threshold.ok_or("no sign change localized")?;
    let step = (spec.lambda_max - spec.lambda_min) / 999.0;
    ensure(t.lambda_below < 1.0 / 6.0 && 1.0 / 6.0 <= t.lambda_above, || {
        format!("interval ({}, {}] misses 1/6", t.lambda_below, t.lambda_above)
    })?;
    ensure(t.grid_step <= step * (1.0 + 1e-9), || format!("interval width {} exceeds one step", t.grid_step))?;
    ensure(report.failures.is_empty(), || format!("{} gated failures", report.failures.len()))?;
    Ok(format!("sign change in ({:.6}, {:.6}], 1000-point grid", t.lambda_below, t.lambda_above))
}

/// Composite Simpson on `[0, 12]` with 240000 panels.
fn simpson(h: impl Fn(f64) -> f64) -> f64 {
    let steps = 240_000;
    let dx = 12.0 / steps as f64;
    let mut acc = h(0.0) + h(12.0);
    for i in 1..steps {
        acc += h(i as f64 * dx) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * dx / 3.0
}

fn ac8() -> Outcome {
    let scheme = QuadratureScheme::default();
    let g = radial_integral_4d(|r| (-r * r).exp(), &scheme).map_err(|e| e.to_string())?;
    let rel_pi = ((g.value - PI * PI) / (PI * PI)).abs();
    ensure(rel_pi <= 1e-10, || format!("gaussian: relative error {rel_pi:e}"))?;

    let w = radial_integral_4d(|r| (-2.0 * r * r).exp() / (r * r + 1.0), &scheme).map_err(|e| e.to_string())?;
    let oracle = 2.0 * PI * PI * simpson(|r| (-2.0 * r * r).exp() * r.powi(3) / (r * r + 1.0));
    // arbitrary-precision reference for the same integral
    let frozen = 2.0 * PI * PI * 0.069_335_691_555_888_71;
    let rel_oracle = ((w.value - oracle) / oracle).abs();
    let rel_frozen = ((w.value - frozen) / frozen).abs();
    ensure(rel_oracle <= 1e-8, || format!("weighted: relative error {rel_oracle:e} against Simpson"))?;
    ensure(rel_frozen <= 1e-8, || format!("weighted: relative error {rel_frozen:e} against reference"))?;
    Ok(format!("pi^2 to {rel_pi:.1e}, weighted to {rel_oracle:.1e} (Simpson) / {rel_frozen:.1e} (reference)"))
}

fn ac9() -> Outcome {
    let mut worst = f64::INFINITY;
    for lambda in [0.04, 0.1, 0.15] {
        let params = PhysicalParams::new(lambda, 1.0).unwrap();
        let bounds = SplittingBounds::build(&params, &RenormConstants::default(), 5);
        let ints =
            scalar_integrals(&TestFunction::unit_gaussian(), &params, EnvelopeMode::Min, &QuadratureScheme::default())
                .map_err(|e| e.to_string())?;
        for n in [3u32, 5] {
            let m = assemble_osp_matrix_with(n, &ints, &bounds, Execution::default()).map_err(|e| e.to_string())?;
            ensure(m.cell(n, n) == Cell::Absent, || format!("P_{n}: ({n},{n}) should be absent"))?;
            let v = psd_check(&m);
            ensure(v.triangular_sum >= 0.0, || {
                format!("P_{n} lambda={lambda}: triangular sum {:e}", v.triangular_sum)
            })?;
            ensure(v.min_eigenvalue_block >= -1e-10 * v.block_norm, || {
                format!("P_{n} lambda={lambda}: min eigenvalue {:e}", v.min_eigenvalue_block)
            })?;
            worst = worst.min(v.min_eigenvalue_block / v.block_norm);
        }
    }
    Ok(format!(
        "P3, P5 at three couplings; smallest normalized eigenvalue {worst:e} on the fully defined leading block"
    ))
}

fn ac10() -> Outcome {
    let spec = ScanSpec::default();
    let a = to_json(&run_scan(&spec, &Provenance::default(), Execution::Parallel).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let b = to_json(&run_scan(&spec, &Provenance::default(), Execution::Parallel).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(a == b, || "library reports differ".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("scan{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_ospverify"))
            .args(["scan", "--out"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure(status.success(), || format!("scan exited with {status}"))?;
        outputs.push(fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "CLI reports differ".into())?;
    Ok(format!("two CLI scans byte-identical ({} bytes)", outputs[0].len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1", "combinatorial oracle equivalence", ac1),
        ("AC2", "worked-example coefficient", ac2),
        ("AC3", "split-bound inequality", ac3),
        ("AC4", "envelope consistency", ac4),
        ("AC5", "small-n positivity", ac5),
        ("AC6", "closed lower bounds", ac6),
        ("AC7", "threshold behavior", ac7),
        ("AC8", "quadrature calibration", ac8),
        ("AC9", "PSD verification", ac9),
        ("AC10", "determinism", ac10),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        match run() {
            Ok(detail) => println!("{id:<5} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("{id:<5} FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
