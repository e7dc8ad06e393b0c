//! `ospverify`: coupling scans, single-point checks, partition tables and
//! decomposition audits.
//!
//! Exit status: 0 when every gated check passes, 1 on a positivity failure
//! inside the weak-condition range, 2 on configuration or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use osp_core::config::{ConfigDocument, Provenance};
use osp_core::verifier::report::{exit_code, records_to_csv, rows_to_csv, to_json};
use osp_core::verifier::{partition_table, run_audit, run_check, run_scan, ScanSpec, VerifierError};
use osp_core::Execution;

#[derive(Parser)]
#[command(
    name = "ospverify",
    version,
    about = "Bound-envelope verification of OS positivity for the Phi^4_4 hierarchy"
)]
struct Cli {
    /// TOML file; its values override command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every odd order up to n-max on a coupling grid.
    Scan {
        #[arg(long, default_value_t = 0.01)]
        lambda_min: f64,
        #[arg(long, default_value_t = 0.16)]
        lambda_max: f64,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, default_value_t = 13)]
        n_max: u32,
        #[command(flatten)]
        eval: EvalArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate one odd order at one coupling.
    Check {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[command(flatten)]
        eval: EvalArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List the odd-part profiles of n with their counts.
    Partitions {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the classical decomposition with the tree reconstruction.
    Audit {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// Gaussian widths, one per slot function.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    sigma: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn read_config(path: Option<&Path>) -> Result<Option<ConfigDocument>, VerifierError> {
    let Some(path) = path else { return Ok(None) };
    let text = fs::read_to_string(path)
        .map_err(|e| VerifierError::Io { path: path.display().to_string(), message: e.to_string() })?;
    Ok(Some(ConfigDocument::parse(&text)?))
}

fn base_spec(eval: &EvalArgs, doc: Option<&ConfigDocument>) -> Result<(ScanSpec, Provenance), VerifierError> {
    let mut spec = ScanSpec { mass: eval.mass, sigma: eval.sigma.clone(), tol: eval.tol, ..ScanSpec::default() };
    let doc = doc.cloned().unwrap_or_default();
    let (constants, provenance) = doc.constants()?;
    spec.constants = constants;
    if let Some(m) = doc.mass {
        spec.mass = m;
    }
    if let Some(scan) = &doc.scan {
        if let Some(s) = &scan.sigma {
            spec.sigma = s.clone();
        }
        if let Some(t) = scan.tol {
            spec.tol = t;
        }
    }
    Ok((spec, provenance))
}

fn emit(output: &OutputArgs, body: &[u8], summary: &str) -> Result<(), VerifierError> {
    match &output.out {
        Some(path) => {
            fs::write(path, body)
                .map_err(|e| VerifierError::Io { path: path.display().to_string(), message: e.to_string() })?;
            println!("{summary}");
        }
        None => {
            print!("{}", String::from_utf8_lossy(body));
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, VerifierError> {
    let doc = read_config(cli.config.as_deref())?;
    match cli.command {
        Command::Scan { lambda_min, lambda_max, steps, n_max, eval, output } => {
            let (mut spec, provenance) = base_spec(&eval, doc.as_ref())?;
            spec.lambda_min = lambda_min;
            spec.lambda_max = lambda_max;
            spec.steps = steps;
            spec.n_max = n_max;
            if let Some(scan) = doc.as_ref().and_then(|d| d.scan.as_ref()) {
                spec.lambda_min = scan.lambda_min.unwrap_or(spec.lambda_min);
                spec.lambda_max = scan.lambda_max.unwrap_or(spec.lambda_max);
                spec.steps = scan.steps.unwrap_or(spec.steps);
                spec.n_max = scan.n_max.unwrap_or(spec.n_max);
            }
            let report = run_scan(&spec, &provenance, Execution::default())?;
            let body = match output.format {
                Format::Json => to_json(&report)?.into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    records_to_csv(&report.records, &mut buf)?;
                    buf
                }
            };
            let mut summary = format!(
                "scan: {} grid points, n <= {}, {} gated failures, {}",
                report.records.len(),
                spec.n_max,
                report.failures.len(),
                if report.pass { "pass" } else { "FAIL" }
            );
            if let Some(t) = report.threshold {
                summary.push_str(&format!(
                    "\nn = 3 margin factor changes sign in ({}, {}]",
                    t.lambda_below, t.lambda_above
                ));
            }
            for w in &report.warnings {
                summary.push_str(&format!("\nwarning: {w}"));
            }
            emit(&output, &body, &summary)?;
            Ok(exit_code(&report.failures))
        }
        Command::Check { n, lambda, eval, output } => {
            let (spec, provenance) = base_spec(&eval, doc.as_ref())?;
            let lambda = doc.as_ref().and_then(|d| d.lambda).unwrap_or(lambda);
            let report = run_check(n, lambda, &spec, &provenance)?;
            let body = match output.format {
                Format::Json => to_json(&report)?.into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    records_to_csv([&report.record], &mut buf)?;
                    buf
                }
            };
            let mut summary =
                format!("check n = {n}, lambda = {lambda}: {}", if report.pass { "pass" } else { "FAIL" });
            for o in &report.record.orders {
                if let Some(s) = &o.small_n {
                    summary.push_str(&format!(
                        "\n  lhs = {:e}, rhs = {:e}, margin = {:e}",
                        s.lhs.value, s.rhs.value, s.margin.value
                    ));
                }
                if let Some(b) = &o.lower_bounds {
                    summary.push_str(&format!("\n  h = {:e}, h_hat = {:e}", b.h.value, b.h_hat.value));
                }
                summary.push_str(&format!(
                    "\n  min eigenvalue (leading block) = {:e}, triangular sum = {:e}",
                    o.psd.min_eigenvalue_block.value, o.triangular_sum.value
                ));
            }
            for f in &report.record.flags {
                summary.push_str(&format!("\nwarning: {f}"));
            }
            emit(&output, &body, &summary)?;
            Ok(exit_code(&report.failures))
        }
        Command::Partitions { n, output } => {
            let rows = partition_table(n)?;
            let body = match output.format {
                Format::Json => to_json(&rows)?.into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    rows_to_csv(&rows, &mut buf)?;
                    buf
                }
            };
            emit(&output, &body, &format!("partitions n = {n}: {} odd profiles", rows.len()))?;
            Ok(0)
        }
        Command::Audit { n, output } => {
            let audit = run_audit(n)?;
            let body = match output.format {
                Format::Json => to_json(&audit)?.into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    rows_to_csv(&audit.rows, &mut buf)?;
                    buf
                }
            };
            let summary = format!(
                "audit n = {n}: {} profiles, tree mismatches {} (set-partition) / {} (multinomial)",
                audit.rows.len(),
                audit.tree_mismatches_setpart.len(),
                audit.tree_mismatches_multinomial.len()
            );
            emit(&output, &body, &summary)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
