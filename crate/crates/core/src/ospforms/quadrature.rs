//! Radial integration over four-dimensional Euclidean momentum space.
//!
//! A radial integrand `g(|q|)` integrates as `2 pi^2 * int_0^inf g(r) r^3 dr`.
//! The half-line is truncated where `|g(r) r^3|` drops below
//! `cutoff_ratio` times its sampled peak and stays there; the finite
//! interval is then integrated by globally adaptive 15-point Gauss–Kronrod.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integrand does not decay below the cutoff within radius {radius:e}")]
    NoDecay { radius: f64 },
    #[error("no convergence after {subdivisions} subdivisions (error estimate {error:e}, value {value:e})")]
    NotConverged { subdivisions: usize, value: f64, error: f64 },
    #[error("integrand is not finite at r = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureScheme {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Truncate where the radial integrand falls below this fraction of its peak.
    pub cutoff_ratio: f64,
    /// Give up looking for the cutoff beyond this radius.
    pub max_radius: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_subdivisions: 4000, cutoff_ratio: 1e-18, max_radius: 1e8 }
    }
}

impl QuadratureScheme {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite(x))
        }
    };
    let fc = eval(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = eval(center - dx)? + eval(center + dx)?;
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Ok(Segment { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() })
}

/// Globally adaptive Gauss–Kronrod on `[a, b]`, starting from `pieces`
/// equal segments.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    pieces: usize,
    scheme: &QuadratureScheme,
) -> Result<QuadResult, QuadratureError> {
    let pieces = pieces.max(1);
    let width = (b - a) / pieces as f64;
    let mut heap = BinaryHeap::with_capacity(scheme.max_subdivisions + pieces);
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        heap.push(gauss_kronrod(&f, lo, hi)?);
    }
    let mut subdivisions = 0;
    loop {
        let (value, error) = totals(&heap);
        if error <= scheme.rel_tol * value.abs() || error == 0.0 {
            return Ok(QuadResult { value, error });
        }
        if subdivisions >= scheme.max_subdivisions {
            return Err(QuadratureError::NotConverged { subdivisions, value, error });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            return Err(QuadratureError::NotConverged { subdivisions, value, error });
        }
        heap.push(gauss_kronrod(&f, worst.a, mid)?);
        heap.push(gauss_kronrod(&f, mid, worst.b)?);
        subdivisions += 1;
    }
}

// Sum in ascending position so the result does not depend on heap layout.
fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    segs.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
}

/// Radius beyond which `|h|` stays below `cutoff_ratio * peak`, or `None`
/// for an identically vanishing integrand.
fn radial_cutoff<H: Fn(f64) -> f64>(h: &H, scheme: &QuadratureScheme) -> Result<Option<f64>, QuadratureError> {
    let mut grid = Vec::new();
    let mut r = 1e-4;
    while r < scheme.max_radius {
        grid.push(r);
        r *= 1.25;
    }
    grid.push(scheme.max_radius);
    let samples: Vec<f64> = grid.iter().map(|&r| h(r).abs()).collect();
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(QuadratureError::NonFinite(grid[i]));
    }
    let peak = samples.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(None);
    }
    let threshold = scheme.cutoff_ratio * peak;
    let last_above = samples.iter().rposition(|&v| v >= threshold).expect("peak is above threshold");
    if last_above + 1 >= grid.len() {
        return Err(QuadratureError::NoDecay { radius: scheme.max_radius });
    }
    Ok(Some(grid[last_above + 1]))
}

/// `2 pi^2 * int_0^inf g(r) r^3 dr` for a radial integrand `g`.
pub fn radial_integral_4d<G: Fn(f64) -> f64>(g: G, scheme: &QuadratureScheme) -> Result<QuadResult, QuadratureError> {
    let h = |r: f64| g(r) * r * r * r;
    let Some(cutoff) = radial_cutoff(&h, scheme)? else {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    };
    let res = integrate_interval(h, 0.0, cutoff, 16, scheme)?;
    let area = 2.0 * PI * PI;
    Ok(QuadResult { value: area * res.value, error: area * res.error })
}
