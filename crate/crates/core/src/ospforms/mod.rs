//! Positivity forms on factorized radial test functions.
//!
//! Every form reduces to `coefficient * ||f||^2 * G1^(n-1)` where
//!
//! * `||f||^2 = int |f|^2 H^2 Delta_F^2 dq`,
//! * `G1 = max over slots of int |f| H^2 Delta_F^2 dq`,
//!
//! and the coefficient is assembled from signs and splitting bounds along
//! the same chain of estimates used in the positivity proof: the explicit
//! `n = 1, 3, 5` forms and the closed lower bounds `h`, `h_hat` for
//! `n >= 7`. The `(-1)^(n-1)` prefactor of `G1^(n-1)` is `+1` for odd `n`
//! and is dropped. Test functions are real, so `Re<.,.>` is the identity.

pub mod matrix;
pub mod quadrature;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PhysicalParams;
use crate::decompositions::Convention;
use crate::greens::{
    h2_envelope_sq, h_bound_closed, h_bound_closed_max, propagator_sq, sign_of_h, EnvelopeEvaluator, EnvelopeMode,
    GreensError, SplittingBounds,
};
use crate::partitions::{enumerate_odd_profiles, require_odd, tree_counts, PartitionError};

pub use matrix::{assemble_osp_matrix, psd_check, OspMatrix, PsdVerdict};
pub use quadrature::{radial_integral_4d, QuadResult, QuadratureError, QuadratureScheme};

#[derive(Debug, Error, PartialEq)]
pub enum FormError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("explicit small-order check covers n in {{1, 3, 5}} only (got {0})")]
    NotSmallOrder(u32),
    #[error("closed lower bounds need odd n >= 7 (got {0})")]
    NotLargeOrder(u32),
    #[error("invalid test function: {0}")]
    BadTestFunction(String),
    #[error("empty test-function family")]
    EmptyFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunctionKind {
    /// `A exp(-q^2 / sigma^2)`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub amplitude: f64,
    pub width: f64,
    pub kind: TestFunctionKind,
}

impl TestFunction {
    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self, FormError> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(FormError::BadTestFunction(format!("amplitude {amplitude}")));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(FormError::BadTestFunction(format!("width {width}")));
        }
        Ok(Self { amplitude, width, kind: TestFunctionKind::Gaussian })
    }

    pub fn unit_gaussian() -> Self {
        Self { amplitude: 1.0, width: 1.0, kind: TestFunctionKind::Gaussian }
    }

    /// Value at radius `r = |q|`.
    pub fn at(&self, r: f64) -> f64 {
        match self.kind {
            TestFunctionKind::Gaussian => self.amplitude * (-(r * r) / (self.width * self.width)).exp(),
        }
    }
}

/// Scalar integrals entering every reduced form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarIntegrals {
    pub norm_sq: f64,
    pub g1: f64,
    pub mode: EnvelopeMode,
    /// Largest absolute quadrature error estimate among the integrals.
    pub error_estimate: f64,
}

impl ScalarIntegrals {
    /// `||f||^2 * G1^(n-1)`.
    pub fn scale(&self, n: u32) -> f64 {
        self.norm_sq * self.g1.powi(n as i32 - 1)
    }

    /// Propagated relative quadrature uncertainty of [`Self::scale`].
    pub fn relative_error(&self, n: u32) -> f64 {
        let rel = |v: f64| if v == 0.0 { 0.0 } else { self.error_estimate / v };
        rel(self.norm_sq) + f64::from(n.saturating_sub(1)) * rel(self.g1)
    }
}

/// `H^2 Delta_F^2` at `|q| = r`.
pub fn two_point_weight(r: f64, params: &PhysicalParams, mode: EnvelopeMode) -> f64 {
    let q2 = r * r;
    let d = propagator_sq(q2, params.mass());
    h2_envelope_sq(q2, params, mode) * d * d
}

/// `||f||^2` and `int |f| H^2 Delta_F^2` for one test function.
pub fn scalar_integrals(
    f: &TestFunction,
    params: &PhysicalParams,
    mode: EnvelopeMode,
    scheme: &QuadratureScheme,
) -> Result<ScalarIntegrals, FormError> {
    let norm = radial_integral_4d(|r| f.at(r).powi(2) * two_point_weight(r, params, mode), scheme)?;
    let g1 = radial_integral_4d(|r| f.at(r).abs() * two_point_weight(r, params, mode), scheme)?;
    Ok(ScalarIntegrals { norm_sq: norm.value, g1: g1.value, mode, error_estimate: norm.error.max(g1.error) })
}

/// Integrals for a family of slot functions: both `||f||^2` and `G1` are
/// taken as the maximum over the family.
pub fn family_integrals(
    family: &[TestFunction],
    params: &PhysicalParams,
    mode: EnvelopeMode,
    scheme: &QuadratureScheme,
) -> Result<ScalarIntegrals, FormError> {
    let mut out: Option<ScalarIntegrals> = None;
    for f in family {
        let s = scalar_integrals(f, params, mode, scheme)?;
        out = Some(match out {
            None => s,
            Some(acc) => ScalarIntegrals {
                norm_sq: acc.norm_sq.max(s.norm_sq),
                g1: acc.g1.max(s.g1),
                mode,
                error_estimate: acc.error_estimate.max(s.error_estimate),
            },
        });
    }
    out.ok_or(FormError::EmptyFamily)
}

/// Reduced coefficient of `<f_(M), tau^{n+1} f_(N)>` for `M + N = n + 1`,
/// following the proof route:
///
/// * `n = 1`: `1`;
/// * `n = 3`: `1 - delta_{3,max}` (the worst case of `delta_3` in its range);
/// * `n = 5`: `delta_{5,min} delta_{3,min} + sum_I C_I prod coeff(i_l)` over
///   the triplets `I` (only `(3,1,1)`, so `10 (1 - delta_{3,max})`);
/// * `n >= 7`: `h(n)` when `H^{n+1} > 0`, `h_hat(n)` otherwise.
pub fn proof_route_coefficient(n: u32, bounds: &SplittingBounds) -> Result<f64, FormError> {
    require_odd(n, 1)?;
    match n {
        1 => Ok(1.0),
        3 => Ok(1.0 - bounds.get(3)?.delta_max),
        5 => {
            let mut acc = h_bound_closed(5, bounds)?;
            for triplet in enumerate_odd_profiles(5, Some(3))? {
                let c = to_f64(&Convention::SetPartition.coefficient(&triplet));
                let mut prod = c;
                for &i in triplet.parts() {
                    prod *= proof_route_coefficient(i, bounds)?;
                }
                acc += prod;
            }
            Ok(acc)
        }
        _ => {
            let t = closed_lower_bounds(n, bounds)?;
            Ok(if sign_of_h(n)? > 0 { t.h } else { t.h_hat })
        }
    }
}

/// Reduced coefficient summed over the classical profiles of `n`, each block
/// replaced by its sign times the matching magnitude bound (lower bound for
/// positive products, upper bound for negative ones).
pub fn classical_route_coefficient(n: u32, bounds: &SplittingBounds) -> Result<f64, FormError> {
    let mut acc = 0.0;
    for profile in enumerate_odd_profiles(n, None)? {
        let mut sign = 1i8;
        let mut lo = 1.0;
        let mut hi = 1.0;
        for &j in profile.parts() {
            if j >= 3 {
                sign *= sign_of_h(j)?;
                lo *= h_bound_closed(j, bounds)?;
                hi *= h_bound_closed_max(j, bounds)?;
            }
        }
        let block = if sign > 0 { lo } else { -hi };
        acc += to_f64(&Convention::SetPartition.coefficient(&profile)) * block;
    }
    Ok(acc)
}

fn to_f64(x: &num_rational::BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(x).expect("representable coefficient")
}

/// Result of one explicit small-order inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallNReport {
    pub n: u32,
    pub lambda: f64,
    pub weak_condition: bool,
    /// Envelope value of the form.
    pub lhs: f64,
    /// Claimed lower bound.
    pub rhs: f64,
    pub margin: f64,
    /// `max(|lhs|, |rhs|, ||f||^2 G1^(n-1))`, the unit for tolerances.
    pub scale: f64,
    pub lhs_coefficient: f64,
    pub rhs_coefficient: f64,
    /// Same form summed over the classical profiles (diagnostic only).
    pub classical_route_lhs: f64,
    pub quadrature_rel_error: f64,
    pub inequality_holds: bool,
    pub positive: bool,
    pub flags: Vec<String>,
}

/// Tolerance, in units of the form's scale, below which a margin still passes.
pub const MARGIN_TOLERANCE: f64 = 1e-8;

/// Explicit check of the `n = 1, 3, 5` positivity inequalities:
///
/// * `n = 1`: `||f||^2 >= 0`;
/// * `n = 3`: `<f, tau^4 f> >= (1 - 6 lambda) ||f||^2 G1^2`;
/// * `n = 5`: `Re<f, tau^6 f> >= (delta_5 delta_3 + 10 (1 - 6 lambda)) ||f||^2 G1^4`
///   with the splitting bounds at their minima.
pub fn check_osp_small_n_with(
    n: u32,
    integrals: &ScalarIntegrals,
    bounds: &SplittingBounds,
) -> Result<SmallNReport, FormError> {
    if !matches!(n, 1 | 3 | 5) {
        return Err(FormError::NotSmallOrder(n));
    }
    let lambda = bounds.lambda;
    let weak = 1.0 - 6.0 * lambda;
    let rhs_coefficient = match n {
        1 => 0.0,
        3 => weak,
        _ => h_bound_closed(5, bounds)? + 10.0 * weak,
    };
    let lhs_coefficient = proof_route_coefficient(n, bounds)?;
    let base = integrals.scale(n);
    let lhs = lhs_coefficient * base;
    let rhs = rhs_coefficient * base;
    let margin = lhs - rhs;
    let scale = lhs.abs().max(rhs.abs()).max(base);
    let tol = MARGIN_TOLERANCE * scale;
    let mut flags = Vec::new();
    let weak_condition = lambda < crate::config::WEAK_CONDITION_LIMIT;
    if !weak_condition {
        flags.push("outside weak-condition range".to_string());
    }
    if !bounds.construction_range {
        flags.push("splitting bounds used outside their construction range".to_string());
    }
    Ok(SmallNReport {
        n,
        lambda,
        weak_condition,
        lhs,
        rhs,
        margin,
        scale,
        lhs_coefficient,
        rhs_coefficient,
        classical_route_lhs: classical_route_coefficient(n, bounds)? * base,
        quadrature_rel_error: integrals.relative_error(n),
        inequality_holds: margin >= -tol,
        positive: lhs >= -tol,
        flags,
    })
}

/// Computes the integrals of `family` and runs [`check_osp_small_n_with`].
pub fn check_osp_small_n(
    n: u32,
    family: &[TestFunction],
    evaluator: &EnvelopeEvaluator,
    mode: EnvelopeMode,
    scheme: &QuadratureScheme,
) -> Result<SmallNReport, FormError> {
    let integrals = family_integrals(family, evaluator.params(), mode, scheme)?;
    check_osp_small_n_with(n, &integrals, evaluator.bounds())
}

/// Closed lower bounds for odd `n >= 7`, with their bracket factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedLowerBounds {
    pub n: u32,
    /// Bound for the positive-sign case.
    pub h: f64,
    /// `1 - 2 delta_{n-2,max} / ((n-2)(n-3))`.
    pub h_bracket: f64,
    /// Bound for the negative-sign case.
    pub h_hat: f64,
    /// `1 - 2 delta_{n,max} / (n (n-1))`.
    pub h_hat_bracket: f64,
}

/// `h = (n-2)(n-3)/2 * prod_{m=3..n} delta_{m,min} T~_m * bracket(n-2)` and
/// `h_hat = n(n-1) T~_n / 2 * bracket(n) * prod_{m=3..n-2} delta_{m,min} T~_m`.
pub fn closed_lower_bounds(n: u32, bounds: &SplittingBounds) -> Result<ClosedLowerBounds, FormError> {
    if n < 7 || n.is_multiple_of(2) {
        return Err(FormError::NotLargeOrder(n));
    }
    let nf = f64::from(n);
    let h_bracket = bounds.bracket(n - 2)?;
    let h_hat_bracket = bounds.bracket(n)?;
    let h = (nf - 2.0) * (nf - 3.0) / 2.0 * h_bound_closed(n, bounds)? * h_bracket;
    let t_tilde = tree_counts(n)?.t_tilde_n as f64;
    let h_hat = nf * (nf - 1.0) * t_tilde / 2.0 * h_hat_bracket * h_bound_closed(n - 2, bounds)?;
    Ok(ClosedLowerBounds { n, h, h_bracket, h_hat, h_hat_bracket })
}
