//! Coupling-grid scans, single-point checks, partition tables and identity
//! audits, producing self-describing reports.

pub mod report;

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, PhysicalParams, Provenance, RenormConstants, WEAK_CONDITION_LIMIT};
use crate::decompositions::{identity_audit, IdentityAudit};
use crate::exec::Execution;
use crate::greens::{sign_of_h, EnvelopeMode, SplittingBounds};
use crate::ospforms::matrix::{assemble_osp_matrix_with, psd_check};
use crate::ospforms::{
    check_osp_small_n_with, closed_lower_bounds, family_integrals, FormError, OspMatrix, QuadratureScheme,
    ScalarIntegrals, TestFunction, MARGIN_TOLERANCE,
};
use crate::partitions::{
    enumerate_odd_profiles, multinomial_count, require_odd, set_partition_count, tree_counts, OddProfile,
    PartitionError,
};
use report::{
    closed, exact, quad, CheckReport, Failure, IntegralsRecord, LambdaRecord, LowerBoundRecord, OrderRecord, OspReport,
    PsdRecord, SmallNRecord, ThresholdLocalization, ToolInfo, SCHEMA_VERSION, SEMANTICS,
};

#[derive(Debug, Error)]
pub enum VerifierError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid scan specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot encode report: {0}")]
    Output(String),
}

impl VerifierError {
    /// Every error maps to the configuration/I-O exit status.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Grid and evaluation settings of a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSpec {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
    pub n_max: u32,
    pub mass: f64,
    /// Widths of the Gaussian slot functions.
    pub sigma: Vec<f64>,
    /// Relative quadrature tolerance.
    pub tol: f64,
    pub mode: EnvelopeMode,
    pub constants: RenormConstants,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            lambda_min: 0.01,
            lambda_max: 0.16,
            steps: 16,
            n_max: 13,
            mass: 1.0,
            sigma: vec![1.0],
            tol: 1e-10,
            mode: EnvelopeMode::Min,
            constants: RenormConstants::default(),
        }
    }
}

impl ScanSpec {
    pub fn validate(&self) -> Result<(), VerifierError> {
        let bad = |m: String| Err(VerifierError::InvalidSpec(m));
        if self.steps < 1 {
            return bad("steps must be >= 1".into());
        }
        if !(self.lambda_min > 0.0 && self.lambda_min <= self.lambda_max && self.lambda_max.is_finite()) {
            return bad(format!("need 0 < lambda_min <= lambda_max (got {} and {})", self.lambda_min, self.lambda_max));
        }
        if self.n_max.is_multiple_of(2) {
            return bad(format!("n_max must be odd (got {})", self.n_max));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return bad(format!("mass must be positive (got {})", self.mass));
        }
        if self.sigma.is_empty() || self.sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad(format!("sigma must be a non-empty list of positive widths (got {:?})", self.sigma));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol must lie in (0, 1) (got {})", self.tol));
        }
        self.constants.validate()?;
        Ok(())
    }

    /// `lambda_min + k (lambda_max - lambda_min) / (steps - 1)`, with the last
    /// point pinned to `lambda_max`.
    pub fn grid(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.lambda_min];
        }
        let step = (self.lambda_max - self.lambda_min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.lambda_max } else { self.lambda_min + step * k as f64 })
            .collect()
    }

    pub fn family(&self) -> Result<Vec<TestFunction>, VerifierError> {
        Ok(self.sigma.iter().map(|&s| TestFunction::gaussian(1.0, s)).collect::<Result<_, _>>()?)
    }

    fn scheme(&self) -> QuadratureScheme {
        QuadratureScheme::with_tol(self.tol)
    }
}

fn evaluate_order(
    n: u32,
    ints: &ScalarIntegrals,
    bounds: &SplittingBounds,
    gated: bool,
    failures: &mut Vec<Failure>,
) -> Result<OrderRecord, VerifierError> {
    let lambda = bounds.lambda;
    let matrix = assemble_osp_matrix_with(n, ints, bounds, Execution::Sequential)?;
    let verdict = psd_check(&matrix);
    let abs_sum: f64 = matrix.iter().filter_map(|(_, _, c)| c.value()).map(f64::abs).sum();
    let mut checks: Vec<(&'static str, bool, f64)> = Vec::new();
    checks.push(("triangular_sum", verdict.triangular_sum >= -MARGIN_TOLERANCE * abs_sum, verdict.triangular_sum));

    let mut small_n = None;
    let mut lower_bounds = None;
    if n <= 5 {
        let r = check_osp_small_n_with(n, ints, bounds)?;
        checks.push(("small_n_inequality", r.inequality_holds, r.margin));
        checks.push(("small_n_positive", r.positive, r.lhs));
        checks.push(("psd_block", verdict.psd, verdict.min_eigenvalue_block));
        small_n = Some(SmallNRecord::from(&r));
    } else {
        let t = closed_lower_bounds(n, bounds)?;
        checks.push(("h_positive", t.h > 0.0, t.h));
        checks.push(("h_hat_positive", t.h_hat > 0.0, t.h_hat));
        lower_bounds = Some(LowerBoundRecord::from(&t));
    }
    if gated {
        for &(check, ok, value) in &checks {
            if !ok {
                failures.push(Failure { lambda, n, check, value });
            }
        }
    }
    let (delta_min, delta_max, t_n, t_tilde_n) = if n >= 3 {
        let pair = bounds.get(n).map_err(FormError::from)?;
        let counts = tree_counts(n)?;
        (
            Some(closed(pair.delta_min)),
            Some(closed(pair.delta_max)),
            Some(exact(counts.t_n)),
            Some(exact(counts.t_tilde_n)),
        )
    } else {
        (None, None, None, None)
    };
    Ok(OrderRecord {
        n,
        sign: exact(sign_of_h(n)?),
        delta_min,
        delta_max,
        t_n,
        t_tilde_n,
        small_n,
        lower_bounds,
        psd: PsdRecord::from(&verdict),
        triangular_sum: quad(verdict.triangular_sum),
        gated_checks: checks.iter().map(|c| c.0).collect(),
        pass: checks.iter().all(|c| c.1),
    })
}

struct PointOutcome {
    record: LambdaRecord,
    failures: Vec<Failure>,
}

fn evaluate_point(spec: &ScanSpec, lambda: f64, orders: &[u32]) -> Result<PointOutcome, VerifierError> {
    let params = PhysicalParams::new(lambda, spec.mass)?;
    let n_top = orders.iter().copied().max().unwrap_or(1);
    let bounds = SplittingBounds::build(&params, &spec.constants, n_top);
    let ints = family_integrals(&spec.family()?, &params, spec.mode, &spec.scheme())?;
    let weak = lambda < WEAK_CONDITION_LIMIT;
    let mut failures = Vec::new();
    let records = orders
        .iter()
        .map(|&n| evaluate_order(n, &ints, &bounds, weak, &mut failures))
        .collect::<Result<Vec<_>, _>>()?;
    let mut flags = Vec::new();
    if !weak {
        flags.push("outside weak-condition range".to_string());
    }
    if !bounds.construction_range {
        flags.push("outside construction range of the splitting bounds".to_string());
    }
    let inverted_orders = bounds.inverted_orders();
    if !inverted_orders.is_empty() {
        flags.push(format!("delta_min > delta_max at n = {inverted_orders:?}"));
    }
    Ok(PointOutcome {
        record: LambdaRecord {
            lambda,
            weak_condition: weak,
            construction_range: bounds.construction_range,
            integrals: IntegralsRecord::from(&ints),
            inverted_orders,
            orders: records,
            flags,
            pass: failures.is_empty(),
        },
        failures,
    })
}

fn threshold(records: &[LambdaRecord]) -> Option<ThresholdLocalization> {
    let factor = |r: &LambdaRecord| {
        r.orders.iter().find(|o| o.n == 3).and_then(|o| o.small_n.as_ref()).map(|s| s.rhs_coefficient.value)
    };
    records.windows(2).find_map(|w| match (factor(&w[0]), factor(&w[1])) {
        (Some(a), Some(b)) if a > 0.0 && b <= 0.0 => Some(ThresholdLocalization {
            lambda_below: w[0].lambda,
            lambda_above: w[1].lambda,
            grid_step: w[1].lambda - w[0].lambda,
        }),
        _ => None,
    })
}

/// Evaluates every odd `n <= n_max` at every grid point. Grid points run
/// under `exec`; records keep grid order.
pub fn run_scan(spec: &ScanSpec, provenance: &Provenance, exec: Execution) -> Result<OspReport, VerifierError> {
    spec.validate()?;
    let orders: Vec<u32> = (1..=spec.n_max).step_by(2).collect();
    let grid = spec.grid();
    let outcomes = exec.try_map(&grid, |&l| evaluate_point(spec, l, &orders))?;
    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    let mut ungated = Vec::new();
    for o in outcomes {
        if !o.record.weak_condition && o.record.orders.iter().any(|r| !r.pass) {
            ungated.push(o.record.lambda);
        }
        failures.extend(o.failures);
        records.push(o.record);
    }
    if let (Some(first), Some(last)) = (ungated.first(), ungated.last()) {
        warnings.push(format!(
            "{} grid points outside the weak-condition range fail ungated checks (lambda in [{first}, {last}])",
            ungated.len()
        ));
    }
    if provenance.defaults_applied() {
        warnings.push(provenance.summary());
    }
    Ok(OspReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::default(),
        kind: "scan",
        semantics: SEMANTICS,
        config: spec.clone(),
        provenance: provenance.clone(),
        threshold: threshold(&records),
        pass: failures.is_empty(),
        records,
        warnings,
        failures,
    })
}

/// Single order at a single coupling, with the full matrix.
pub fn run_check(n: u32, lambda: f64, spec: &ScanSpec, provenance: &Provenance) -> Result<CheckReport, VerifierError> {
    require_odd(n, 1)?;
    let spec = ScanSpec { lambda_min: lambda, lambda_max: lambda, steps: 1, n_max: n, ..spec.clone() };
    spec.validate()?;
    let outcome = evaluate_point(&spec, lambda, &[n])?;
    let params = PhysicalParams::new(lambda, spec.mass)?;
    let bounds = SplittingBounds::build(&params, &spec.constants, n);
    let ints = family_integrals(&spec.family()?, &params, spec.mode, &spec.scheme())?;
    let matrix: OspMatrix = assemble_osp_matrix_with(n, &ints, &bounds, Execution::default())?;
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::default(),
        kind: "check",
        semantics: SEMANTICS,
        config: spec,
        provenance: provenance.clone(),
        record: outcome.record,
        matrix,
        pass: outcome.failures.is_empty(),
        failures: outcome.failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionRow {
    pub profile: OddProfile,
    pub k: u32,
    pub set_partition_count: String,
    pub multinomial_count: String,
}

/// Odd profiles of `n` with their labeled and multinomial counts.
pub fn partition_table(n: u32) -> Result<Vec<PartitionRow>, VerifierError> {
    Ok(enumerate_odd_profiles(n, None)?
        .into_iter()
        .map(|p| PartitionRow {
            k: p.k(),
            set_partition_count: set_partition_count(&p).to_string(),
            multinomial_count: multinomial_count(&p).to_string(),
            profile: p,
        })
        .collect())
}

pub fn run_audit(n: u32) -> Result<IdentityAudit, VerifierError> {
    Ok(identity_audit(n)?)
}
