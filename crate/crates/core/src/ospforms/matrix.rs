//! OSP Gram matrices `P_n` and their positivity verdicts.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::{classical_route_coefficient, family_integrals, proof_route_coefficient, FormError, QuadratureScheme};
use super::{ScalarIntegrals, TestFunction};
use crate::exec::Execution;
use crate::greens::{EnvelopeEvaluator, EnvelopeMode, SplittingBounds};
use crate::partitions::require_odd;

/// Relative tolerance on the minimum eigenvalue, in units of the Frobenius
/// norm of the tested block.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    /// `<f_(M), tau^{M+N} f_(N)>` in envelope mode, with the same entry
    /// summed along the classical profiles for diagnostics.
    Value { value: f64, classical_route: f64 },
    /// `M` and `N` of different parity.
    ParityZero,
    /// `M + N > n + 1`: not part of the positivity condition.
    Absent,
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Cell::Value { value, .. } => Some(value),
            Cell::ParityZero => Some(0.0),
            Cell::Absent => None,
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Cell::Value { value, classical_route } => {
                let mut st = s.serialize_struct("Cell", 3)?;
                st.serialize_field("status", "value")?;
                st.serialize_field("value", &value)?;
                st.serialize_field("classical_route", &classical_route)?;
                st.end()
            }
            Cell::ParityZero => {
                let mut st = s.serialize_struct("Cell", 2)?;
                st.serialize_field("status", "parity_zero")?;
                st.serialize_field("value", &0.0)?;
                st.end()
            }
            Cell::Absent => {
                let mut st = s.serialize_struct("Cell", 1)?;
                st.serialize_field("status", "absent")?;
                st.end()
            }
        }
    }
}

/// `n x n` matrix indexed from 1, serialized with `"M,N"` keys in
/// ascending numeric order.
#[derive(Debug, Clone, PartialEq)]
pub struct OspMatrix {
    n: u32,
    mode: EnvelopeMode,
    cells: Vec<Cell>,
}

impl OspMatrix {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn mode(&self) -> EnvelopeMode {
        self.mode
    }

    /// Cell `(m, n)` with 1-based indices.
    pub fn cell(&self, m: u32, n: u32) -> Cell {
        assert!((1..=self.n).contains(&m) && (1..=self.n).contains(&n), "index out of range");
        self.cells[((m - 1) * self.n + (n - 1)) as usize]
    }

    /// `(M, N, cell)` in ascending `(M, N)` order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, Cell)> + '_ {
        (1..=self.n).flat_map(move |m| (1..=self.n).map(move |k| (m, k, self.cell(m, k))))
    }

    /// Sum of every defined entry, the literal positivity condition.
    pub fn triangular_sum(&self) -> f64 {
        self.iter().filter_map(|(_, _, c)| c.value()).sum()
    }
}

impl Serialize for OspMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Entries<'a>(&'a OspMatrix);
        impl Serialize for Entries<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.0.cells.len()))?;
                for (m, n, cell) in self.0.iter() {
                    map.serialize_entry(&format!("{m},{n}"), &cell)?;
                }
                map.end()
            }
        }
        let mut st = s.serialize_struct("OspMatrix", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("mode", &self.mode)?;
        st.serialize_field("entries", &Entries(self))?;
        st.end()
    }
}

/// Assembles `P_n` from precomputed scalar integrals. Entry `(M, N)` with
/// `M + N <= n + 1` and `M = N (mod 2)` is
/// `coefficient(M + N - 1) * ||f||^2 * G1^(M + N - 2)`.
pub fn assemble_osp_matrix_with(
    n: u32,
    integrals: &ScalarIntegrals,
    bounds: &SplittingBounds,
    exec: Execution,
) -> Result<OspMatrix, FormError> {
    require_odd(n, 1)?;
    let index: Vec<(u32, u32)> = (1..=n).flat_map(|m| (1..=n).map(move |k| (m, k))).collect();
    let cells = exec.try_map(&index, |&(m, k)| -> Result<Cell, FormError> {
        if m + k > n + 1 {
            return Ok(Cell::Absent);
        }
        if (m + k) % 2 == 1 {
            return Ok(Cell::ParityZero);
        }
        let order = m + k - 1;
        let scale = integrals.scale(order);
        Ok(Cell::Value {
            value: proof_route_coefficient(order, bounds)? * scale,
            classical_route: classical_route_coefficient(order, bounds)? * scale,
        })
    })?;
    Ok(OspMatrix { n, mode: integrals.mode, cells })
}

/// Computes the family integrals and assembles `P_n`.
pub fn assemble_osp_matrix(
    n: u32,
    family: &[TestFunction],
    evaluator: &EnvelopeEvaluator,
    mode: EnvelopeMode,
    scheme: &QuadratureScheme,
    exec: Execution,
) -> Result<OspMatrix, FormError> {
    let integrals = family_integrals(family, evaluator.params(), mode, scheme)?;
    assemble_osp_matrix_with(n, &integrals, evaluator.bounds(), exec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdVerdict {
    /// Minimum eigenvalue of the leading block `M, N <= (n + 1) / 2`, the
    /// largest principal block on which every entry is defined.
    pub min_eigenvalue_block: f64,
    pub block_size: u32,
    /// Frobenius norm of the leading block.
    pub block_norm: f64,
    /// Minimum eigenvalue with absent entries replaced by zero. A zero
    /// diagonal next to a nonzero off-diagonal entry makes this negative
    /// whenever `n >= 3`, so it is informational.
    pub min_eigenvalue_zero_filled: f64,
    pub psd: bool,
    pub triangular_sum: f64,
}

fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn psd_check(matrix: &OspMatrix) -> PsdVerdict {
    let n = matrix.n() as usize;
    let full = DMatrix::from_fn(n, n, |i, j| matrix.cell(i as u32 + 1, j as u32 + 1).value().unwrap_or(0.0));
    let b = n.div_ceil(2);
    let block = full.view((0, 0), (b, b)).into_owned();
    let block_norm = block.norm();
    let min_block = min_eigenvalue(block);
    PsdVerdict {
        min_eigenvalue_block: min_block,
        block_size: b as u32,
        block_norm,
        min_eigenvalue_zero_filled: min_eigenvalue(full),
        psd: min_block >= -PSD_TOLERANCE * block_norm,
        triangular_sum: matrix.triangular_sum(),
    }
}
