//! Pointwise envelopes for the propagator, the two-point function, the
//! splitting-bound sequences and the connected/tree-term magnitudes.
//!
//! Everything here is a bound, not a solution value: `Min` and `Max` select
//! the lower or upper envelope of the magnitude, and signs come from
//! [`sign_of_h`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::Add;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{PhysicalParams, RenormConstants};
use crate::partitions::{require_odd, tree_counts, PartitionError, TreeCounts};

/// Exponent of the anomalous term in the upper two-point envelope.
pub fn h2_exponent() -> f64 {
    PI * PI / 54.0
}

#[derive(Debug, Error, PartialEq)]
pub enum GreensError {
    #[error(transparent)]
    Order(#[from] PartitionError),
    #[error("expected {expected} momenta, got {got}")]
    MomentumCount { expected: usize, got: usize },
    #[error("splitting bounds not tabulated for n = {n} (table ends at {n_max})")]
    NotTabulated { n: u32, n_max: u32 },
    #[error("non-finite momentum component")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeMode {
    Min,
    Max,
}

/// Euclidean four-momentum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Momentum4 {
    components: [f64; 4],
}

impl Momentum4 {
    pub fn new(components: [f64; 4]) -> Result<Self, GreensError> {
        if components.iter().all(|c| c.is_finite()) {
            Ok(Self { components })
        } else {
            Err(GreensError::NonFinite)
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn components(&self) -> [f64; 4] {
        self.components
    }

    /// Euclidean square `q^2`.
    pub fn sq(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum()
    }
}

impl Add for Momentum4 {
    type Output = Momentum4;

    fn add(self, rhs: Momentum4) -> Momentum4 {
        let mut c = self.components;
        for (a, b) in c.iter_mut().zip(rhs.components) {
            *a += b;
        }
        Momentum4 { components: c }
    }
}

/// `1 / (q^2 + m^2)`.
pub fn propagator(q: &Momentum4, mass: f64) -> f64 {
    propagator_sq(q.sq(), mass)
}

pub fn propagator_sq(q2: f64, mass: f64) -> f64 {
    1.0 / (q2 + mass * mass)
}

/// Two-point envelope at `q`.
///
/// `Min`: `q^2 + m^2`. `Max`: `gamma_max * (s + 6 lambda^2 s^(pi^2/54))`
/// with `s = q^2 + m^2`.
pub fn h2_envelope(q: &Momentum4, params: &PhysicalParams, mode: EnvelopeMode) -> f64 {
    h2_envelope_sq(q.sq(), params, mode)
}

pub fn h2_envelope_sq(q2: f64, params: &PhysicalParams, mode: EnvelopeMode) -> f64 {
    let s = q2 + params.mass() * params.mass();
    match mode {
        EnvelopeMode::Min => s,
        EnvelopeMode::Max => {
            let l = params.lambda();
            params.gamma_max() * (s + 6.0 * l * l * s.powf(h2_exponent()))
        }
    }
}

/// Lower and upper splitting bounds at one order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitPair {
    pub delta_min: f64,
    pub delta_max: f64,
    /// Denominator `D` of `delta_max`; `delta_max = 3 lambda n (n-1) / D`
    /// for `n >= 5`.
    #[serde(skip)]
    pub max_denominator: f64,
}

/// Splitting bounds at odd `n >= 3`.
///
/// `n = 3`: `delta_min = 6L / gamma_max`, `delta_max = 6L / (1 + rho0 + L a0 + 6 d0)`.
/// `n >= 5`: `delta_min = x / (gamma_max + rho_max + L a_max + x)`,
/// `delta_max = x / (1 + rho0 + L a0 + n(n-1) d0)` with `x = 3 L n (n-1)`.
pub fn splitting_bounds(
    n: u32,
    params: &PhysicalParams,
    constants: &RenormConstants,
) -> Result<SplitPair, PartitionError> {
    require_odd(n, 3)?;
    let l = params.lambda();
    let nn = f64::from(n) * f64::from(n - 1);
    let base = 1.0 + constants.rho0 + l * constants.a0;
    if n == 3 {
        let max_denominator = base + 6.0 * constants.d0;
        return Ok(SplitPair {
            delta_min: 6.0 * l / params.gamma_max(),
            delta_max: 6.0 * l / max_denominator,
            max_denominator,
        });
    }
    let x = 3.0 * l * nn;
    let max_denominator = base + nn * constants.d0;
    let min_denominator = params.gamma_max() + constants.rho_max(l) + l * constants.a_max(l) + x;
    Ok(SplitPair { delta_min: x / min_denominator, delta_max: x / max_denominator, max_denominator })
}

/// `delta_max` at odd `n >= 3` in exact rational arithmetic, with every
/// input taken at its exact binary value.
pub fn delta_max_exact(n: u32, lambda: f64, constants: &RenormConstants) -> Result<BigRational, PartitionError> {
    require_odd(n, 3)?;
    let r = |x: f64| BigRational::from_float(x).expect("finite input");
    let int = |x: u64| BigRational::from_integer(BigInt::from(x));
    let l = r(lambda);
    let nn = int(u64::from(n) * u64::from(n - 1));
    let base = int(1) + r(constants.rho0) + &l * r(constants.a0);
    if n == 3 {
        return Ok(int(6) * &l / (base + int(6) * r(constants.d0)));
    }
    Ok(int(3) * &l * &nn / (base + &nn * r(constants.d0)))
}

/// `3 lambda n (n-1)`, exactly.
pub fn tree_scale_exact(n: u32, lambda: f64) -> BigRational {
    let l = BigRational::from_float(lambda).expect("finite input");
    BigRational::from_integer(BigInt::from(3 * u64::from(n) * u64::from(n - 1))) * l
}

/// Table of splitting bounds for odd `3 <= n <= n_max` at one coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingBounds {
    pub lambda: f64,
    pub table: BTreeMap<u32, SplitPair>,
    /// Whether `lambda` lies in the range where the formulas were derived.
    pub construction_range: bool,
    /// Limit `3 lambda / d0` of `delta_max`, when `d0 > 0`.
    pub delta_infinity: Option<f64>,
}

impl SplittingBounds {
    pub fn build(params: &PhysicalParams, constants: &RenormConstants, n_max: u32) -> Self {
        let table = (3..=n_max.max(3))
            .step_by(2)
            .map(|n| (n, splitting_bounds(n, params, constants).expect("odd n >= 3")))
            .collect();
        Self {
            lambda: params.lambda(),
            table,
            construction_range: params.in_construction_range(),
            delta_infinity: (constants.d0 > 0.0).then(|| 3.0 * params.lambda() / constants.d0),
        }
    }

    pub fn n_max(&self) -> u32 {
        self.table.keys().next_back().copied().unwrap_or(3)
    }

    pub fn get(&self, n: u32) -> Result<SplitPair, GreensError> {
        require_odd(n, 3)?;
        self.table.get(&n).copied().ok_or(GreensError::NotTabulated { n, n_max: self.n_max() })
    }

    /// `1 - 2 delta_max / (n (n-1))` for `n >= 5`, evaluated as `1 - 6L / D`
    /// so that it never rounds below `1 - 6L`.
    pub fn bracket(&self, n: u32) -> Result<f64, GreensError> {
        let pair = self.get(n)?;
        if n == 3 {
            return Ok(1.0 - pair.delta_max / 3.0);
        }
        Ok(1.0 - 6.0 * self.lambda / pair.max_denominator)
    }

    /// Orders at which the lower bound exceeds the upper one (possible when
    /// the renormalization constants are large).
    pub fn inverted_orders(&self) -> Vec<u32> {
        self.table.iter().filter(|(_, p)| p.delta_min > p.delta_max).map(|(&n, _)| n).collect()
    }
}

/// `(-1)^((n-1)/2)`.
pub fn sign_of_h(n: u32) -> Result<i8, PartitionError> {
    require_odd(n, 1)?;
    Ok(if (n / 2).is_multiple_of(2) { 1 } else { -1 })
}

fn tree_factor(counts: TreeCounts, mode: EnvelopeMode) -> f64 {
    match mode {
        EnvelopeMode::Min => counts.t_tilde_n as f64,
        EnvelopeMode::Max => counts.t_n as f64,
    }
}

/// Momentum-independent prefactor of `|H^{n+1}_min|`:
/// `prod over odd m = 3..=n of delta_{m,min} * T~_m`.
pub fn h_bound_closed(n: u32, bounds: &SplittingBounds) -> Result<f64, GreensError> {
    closed_product(n, bounds, EnvelopeMode::Min)
}

/// Upper counterpart `prod delta_{m,max} * T_m`.
pub fn h_bound_closed_max(n: u32, bounds: &SplittingBounds) -> Result<f64, GreensError> {
    closed_product(n, bounds, EnvelopeMode::Max)
}

fn closed_product(n: u32, bounds: &SplittingBounds, mode: EnvelopeMode) -> Result<f64, GreensError> {
    require_odd(n, 3)?;
    let mut acc = 1.0;
    for m in (3..=n).step_by(2) {
        let pair = bounds.get(m)?;
        let delta = match mode {
            EnvelopeMode::Min => pair.delta_min,
            EnvelopeMode::Max => pair.delta_max,
        };
        acc *= delta * tree_factor(tree_counts(m)?, mode);
    }
    Ok(acc)
}

/// Envelope evaluator over fixed parameters and a tabulated bound sequence.
#[derive(Debug, Clone)]
pub struct EnvelopeEvaluator {
    params: PhysicalParams,
    constants: RenormConstants,
    bounds: SplittingBounds,
}

impl EnvelopeEvaluator {
    pub fn new(params: PhysicalParams, constants: RenormConstants, n_max: u32) -> Self {
        let bounds = SplittingBounds::build(&params, &constants, n_max);
        Self { params, constants, bounds }
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn constants(&self) -> &RenormConstants {
        &self.constants
    }

    pub fn bounds(&self) -> &SplittingBounds {
        &self.bounds
    }

    /// `H^2(q) * Delta_F(q)` under the selected envelope.
    pub fn leg(&self, q: &Momentum4, mode: EnvelopeMode) -> f64 {
        h2_envelope(q, &self.params, mode) * propagator(q, self.params.mass())
    }

    fn delta(&self, n: u32, mode: EnvelopeMode) -> Result<f64, GreensError> {
        let pair = self.bounds.get(n)?;
        Ok(match mode {
            EnvelopeMode::Min => pair.delta_min,
            EnvelopeMode::Max => pair.delta_max,
        })
    }

    /// Recursive bound on `|H^{n+1}|`:
    /// `|H^4| = delta_3 prod_{l=1..3} leg(q_l)` and
    /// `|H^{n+1}| = delta_n T * Delta_F(q_1 + .. + q_{n-2}) |H^{n-1}|(q_1..q_{n-2}) leg(q_{n-1}) leg(q_n)`,
    /// with `T~` and the lower envelopes for `Min`, `T` and the upper ones for `Max`.
    pub fn h_bound_recursive(&self, n: u32, momenta: &[Momentum4], mode: EnvelopeMode) -> Result<f64, GreensError> {
        require_odd(n, 3)?;
        check_count(n, momenta)?;
        let mut value = self.delta(3, mode)? * momenta[..3].iter().map(|q| self.leg(q, mode)).product::<f64>();
        let mut total = momenta[..3].iter().fold(Momentum4::zero(), |acc, q| acc + *q);
        for m in (5..=n).step_by(2) {
            let m_us = m as usize;
            let t = tree_factor(tree_counts(m)?, mode);
            value = self.delta(m, mode)?
                * t
                * propagator(&total, self.params.mass())
                * value
                * self.leg(&momenta[m_us - 2], mode)
                * self.leg(&momenta[m_us - 1], mode);
            total = total + momenta[m_us - 2] + momenta[m_us - 1];
        }
        Ok(value)
    }

    /// Bound on the tree term `|C^{n+1}|`.
    ///
    /// `n = 3`: `6 lambda prod_{l=1..3} leg(q_l)`. `n >= 5`:
    /// `3 lambda n (n-1) T |H^{n-1}|(q_1..q_{n-2}) leg(q_{n-1}) leg(q_n)`.
    pub fn c_bound(&self, n: u32, momenta: &[Momentum4], mode: EnvelopeMode) -> Result<f64, GreensError> {
        require_odd(n, 3)?;
        check_count(n, momenta)?;
        let lambda = self.params.lambda();
        if n == 3 {
            return Ok(6.0 * lambda * momenta.iter().map(|q| self.leg(q, mode)).product::<f64>());
        }
        let n_us = n as usize;
        let nn = f64::from(n) * f64::from(n - 1);
        let inner = self.h_bound_recursive(n - 2, &momenta[..n_us - 2], mode)?;
        Ok(3.0
            * lambda
            * nn
            * tree_factor(tree_counts(n)?, mode)
            * inner
            * self.leg(&momenta[n_us - 2], mode)
            * self.leg(&momenta[n_us - 1], mode))
    }
}

fn check_count(n: u32, momenta: &[Momentum4]) -> Result<(), GreensError> {
    if momenta.len() != n as usize {
        return Err(GreensError::MomentumCount { expected: n as usize, got: momenta.len() });
    }
    Ok(())
}
