//! Report records and their JSON/CSV encodings.

use std::io::Write;

use serde::Serialize;

use super::{ScanSpec, VerifierError};
use crate::config::Provenance;
use crate::ospforms::matrix::PsdVerdict;
use crate::ospforms::{ClosedLowerBounds, OspMatrix, ScalarIntegrals, SmallNReport};

pub const SCHEMA_VERSION: &str = "1.0.0";
pub const TOOL_NAME: &str = "ospverify";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// How a number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    /// Exact integer or rational arithmetic.
    Exact,
    /// Floating-point evaluation of a closed form.
    ClosedForm,
    /// Depends on numerical quadrature or an eigenvalue solver.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tagged<T> {
    pub value: T,
    pub tag: Tag,
}

pub fn exact<T>(value: T) -> Tagged<T> {
    Tagged { value, tag: Tag::Exact }
}

pub fn closed(value: f64) -> Tagged<f64> {
    Tagged { value, tag: Tag::ClosedForm }
}

pub fn quad(value: f64) -> Tagged<f64> {
    Tagged { value, tag: Tag::Quadrature }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self { name: TOOL_NAME, version: TOOL_VERSION }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralsRecord {
    pub norm_sq: Tagged<f64>,
    pub g1: Tagged<f64>,
    pub error_estimate: Tagged<f64>,
}

impl From<&ScalarIntegrals> for IntegralsRecord {
    fn from(s: &ScalarIntegrals) -> Self {
        Self { norm_sq: quad(s.norm_sq), g1: quad(s.g1), error_estimate: quad(s.error_estimate) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallNRecord {
    pub lhs: Tagged<f64>,
    pub rhs: Tagged<f64>,
    pub margin: Tagged<f64>,
    pub scale: Tagged<f64>,
    pub lhs_coefficient: Tagged<f64>,
    /// `1 - 6 lambda` at `n = 3`.
    pub rhs_coefficient: Tagged<f64>,
    pub classical_route_lhs: Tagged<f64>,
    pub inequality_holds: bool,
    pub positive: bool,
}

impl From<&SmallNReport> for SmallNRecord {
    fn from(r: &SmallNReport) -> Self {
        Self {
            lhs: quad(r.lhs),
            rhs: quad(r.rhs),
            margin: quad(r.margin),
            scale: quad(r.scale),
            lhs_coefficient: closed(r.lhs_coefficient),
            rhs_coefficient: closed(r.rhs_coefficient),
            classical_route_lhs: quad(r.classical_route_lhs),
            inequality_holds: r.inequality_holds,
            positive: r.positive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundRecord {
    pub h: Tagged<f64>,
    pub h_bracket: Tagged<f64>,
    pub h_hat: Tagged<f64>,
    pub h_hat_bracket: Tagged<f64>,
}

impl From<&ClosedLowerBounds> for LowerBoundRecord {
    fn from(t: &ClosedLowerBounds) -> Self {
        Self {
            h: closed(t.h),
            h_bracket: closed(t.h_bracket),
            h_hat: closed(t.h_hat),
            h_hat_bracket: closed(t.h_hat_bracket),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdRecord {
    pub min_eigenvalue_block: Tagged<f64>,
    pub block_size: Tagged<u32>,
    pub block_norm: Tagged<f64>,
    pub min_eigenvalue_zero_filled: Tagged<f64>,
    pub psd: bool,
}

impl From<&PsdVerdict> for PsdRecord {
    fn from(v: &PsdVerdict) -> Self {
        Self {
            min_eigenvalue_block: quad(v.min_eigenvalue_block),
            block_size: exact(v.block_size),
            block_norm: quad(v.block_norm),
            min_eigenvalue_zero_filled: quad(v.min_eigenvalue_zero_filled),
            psd: v.psd,
        }
    }
}

/// One odd order at one coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderRecord {
    pub n: u32,
    pub sign: Tagged<i8>,
    pub delta_min: Option<Tagged<f64>>,
    pub delta_max: Option<Tagged<f64>>,
    pub t_n: Option<Tagged<u64>>,
    pub t_tilde_n: Option<Tagged<u64>>,
    pub small_n: Option<SmallNRecord>,
    pub lower_bounds: Option<LowerBoundRecord>,
    pub psd: PsdRecord,
    pub triangular_sum: Tagged<f64>,
    /// Names of the checks that decide `pass`.
    pub gated_checks: Vec<&'static str>,
    pub pass: bool,
}

/// All orders at one coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaRecord {
    pub lambda: f64,
    pub weak_condition: bool,
    pub construction_range: bool,
    pub integrals: IntegralsRecord,
    pub inverted_orders: Vec<u32>,
    pub orders: Vec<OrderRecord>,
    pub flags: Vec<String>,
    /// `false` only for a failing record inside the weak-condition range.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub lambda: f64,
    pub n: u32,
    pub check: &'static str,
    pub value: f64,
}

/// Grid interval on which the `n = 3` margin factor `1 - 6 lambda` changes
/// from positive to non-positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdLocalization {
    pub lambda_below: f64,
    pub lambda_above: f64,
    pub grid_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OspReport {
    pub schema_version: &'static str,
    pub tool: ToolInfo,
    pub kind: &'static str,
    pub semantics: &'static str,
    pub config: ScanSpec,
    pub provenance: Provenance,
    pub records: Vec<LambdaRecord>,
    pub threshold: Option<ThresholdLocalization>,
    pub warnings: Vec<String>,
    pub failures: Vec<Failure>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema_version: &'static str,
    pub tool: ToolInfo,
    pub kind: &'static str,
    pub semantics: &'static str,
    pub config: ScanSpec,
    pub provenance: Provenance,
    pub record: LambdaRecord,
    pub matrix: OspMatrix,
    pub failures: Vec<Failure>,
    pub pass: bool,
}

pub const SEMANTICS: &str = "bound-envelope verification";

/// Exit status of a gated report: `0` when every gated check passes, `1`
/// otherwise.
pub fn exit_code(failures: &[Failure]) -> i32 {
    if failures.is_empty() {
        0
    } else {
        1
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, VerifierError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| VerifierError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
struct CsvRow {
    lambda: f64,
    n: u32,
    weak_condition: bool,
    sign: i8,
    delta_min: Option<f64>,
    delta_max: Option<f64>,
    t_n: Option<u64>,
    t_tilde_n: Option<u64>,
    norm_sq: f64,
    g1: f64,
    small_n_lhs: Option<f64>,
    small_n_rhs: Option<f64>,
    small_n_margin: Option<f64>,
    h: Option<f64>,
    h_bracket: Option<f64>,
    h_hat: Option<f64>,
    h_hat_bracket: Option<f64>,
    min_eigenvalue_block: f64,
    min_eigenvalue_zero_filled: f64,
    psd: bool,
    triangular_sum: f64,
    pass: bool,
}

fn csv_rows(record: &LambdaRecord) -> impl Iterator<Item = CsvRow> + '_ {
    record.orders.iter().map(move |o| CsvRow {
        lambda: record.lambda,
        n: o.n,
        weak_condition: record.weak_condition,
        sign: o.sign.value,
        delta_min: o.delta_min.map(|t| t.value),
        delta_max: o.delta_max.map(|t| t.value),
        t_n: o.t_n.map(|t| t.value),
        t_tilde_n: o.t_tilde_n.map(|t| t.value),
        norm_sq: record.integrals.norm_sq.value,
        g1: record.integrals.g1.value,
        small_n_lhs: o.small_n.as_ref().map(|s| s.lhs.value),
        small_n_rhs: o.small_n.as_ref().map(|s| s.rhs.value),
        small_n_margin: o.small_n.as_ref().map(|s| s.margin.value),
        h: o.lower_bounds.as_ref().map(|b| b.h.value),
        h_bracket: o.lower_bounds.as_ref().map(|b| b.h_bracket.value),
        h_hat: o.lower_bounds.as_ref().map(|b| b.h_hat.value),
        h_hat_bracket: o.lower_bounds.as_ref().map(|b| b.h_hat_bracket.value),
        min_eigenvalue_block: o.psd.min_eigenvalue_block.value,
        min_eigenvalue_zero_filled: o.psd.min_eigenvalue_zero_filled.value,
        psd: o.psd.psd,
        triangular_sum: o.triangular_sum.value,
        pass: o.pass,
    })
}

/// Flat projection with one row per `(lambda, n)`.
pub fn records_to_csv<'a, W: Write>(
    records: impl IntoIterator<Item = &'a LambdaRecord>,
    out: W,
) -> Result<(), VerifierError> {
    let mut w = csv::Writer::from_writer(out);
    for record in records {
        for row in csv_rows(record) {
            w.serialize(row).map_err(|e| VerifierError::Output(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| VerifierError::Output(e.to_string()))
}

/// Serializes any sequence of flat rows as CSV.
pub fn rows_to_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), VerifierError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| VerifierError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| VerifierError::Output(e.to_string()))
}
