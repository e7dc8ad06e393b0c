//! Connected-parts decompositions of the non-connected function as formal
//! sums over odd profiles, the three-stratum split, the triplet
//! (tree-reconstruction) expansion, its audit, and the `T1 + T2` lower bound.
//!
//! Coefficients are exact rationals. Sums are keyed by profile only; labeled
//! information is already absorbed in the coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exec::Execution;
use crate::greens::{sign_of_h, EnvelopeEvaluator, EnvelopeMode, GreensError, Momentum4};
use crate::partitions::{
    enumerate_odd_profiles, multinomial_count, require_odd, set_partition_count, OddProfile, PartitionError,
};

/// Largest order accepted by [`identity_audit`].
pub const AUDIT_LIMIT: u32 = 13;

#[derive(Debug, Error, PartialEq)]
pub enum DecompositionError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error("T1 + T2 bound applies to the negative-sign case only; H^{n1} has sign +1 at n = {n}", n1 = n + 1)]
    WrongSignCase { n: u32 },
}

/// How the coefficient of a profile is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Labeled set-partition count `n! / (prod j! prod mult!)`.
    SetPartition,
    /// Plain multinomial `n! / prod j!`, as printed in the classical formula.
    Multinomial,
}

impl Convention {
    pub fn coefficient(self, profile: &OddProfile) -> BigRational {
        let c = match self {
            Convention::SetPartition => set_partition_count(profile),
            Convention::Multinomial => multinomial_count(profile),
        };
        BigRational::from_integer(BigInt::from(c))
    }
}

/// Exact rational serialized as `"p"` or `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Coefficient(pub BigRational);

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

/// Linear combination of profiles of a common `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSum {
    n: u32,
    terms: BTreeMap<OddProfile, BigRational>,
}

impl FormalSum {
    pub fn empty(n: u32) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, profile: &OddProfile) -> BigRational {
        self.terms.get(profile).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OddProfile, &BigRational)> {
        self.terms.iter()
    }

    pub fn profiles(&self) -> impl Iterator<Item = &OddProfile> {
        self.terms.keys()
    }

    /// Adds `coeff` to the term of `profile`; zero results are dropped.
    pub fn add_term(&mut self, profile: OddProfile, coeff: BigRational) {
        debug_assert_eq!(profile.n(), self.n);
        let entry = self.terms.entry(profile.clone()).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&profile);
        }
    }

    pub fn plus(&self, other: &FormalSum) -> FormalSum {
        assert_eq!(self.n, other.n, "formal sums over different n");
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(p.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &FormalSum) -> FormalSum {
        self.plus(&other.scaled(&-BigRational::one()))
    }

    pub fn scaled(&self, factor: &BigRational) -> FormalSum {
        let mut out = FormalSum::empty(self.n);
        for (p, c) in &self.terms {
            out.add_term(p.clone(), c * factor);
        }
        out
    }

    /// Product of block sums: profiles merge, coefficients multiply.
    pub fn times(&self, other: &FormalSum) -> FormalSum {
        let mut out = FormalSum::empty(self.n + other.n);
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                out.add_term(p.merge(q), a * b);
            }
        }
        out
    }

    /// Restriction to profiles with `k` in `range`.
    pub fn filter_k(&self, keep: impl Fn(u32) -> bool) -> FormalSum {
        FormalSum {
            n: self.n,
            terms: self.terms.iter().filter(|(p, _)| keep(p.k())).map(|(p, c)| (p.clone(), c.clone())).collect(),
        }
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}: {c}")?;
        }
        write!(f, "}}")
    }
}

/// Classical connected-parts decomposition: one term per odd profile of `n`
/// with the set-partition coefficient.
pub fn classical_decomposition(n: u32) -> Result<FormalSum, PartitionError> {
    classical_decomposition_with(n, Convention::SetPartition)
}

pub fn classical_decomposition_with(n: u32, convention: Convention) -> Result<FormalSum, PartitionError> {
    let mut sum = FormalSum::empty(n);
    for p in enumerate_odd_profiles(n, None)? {
        let c = convention.coefficient(&p);
        sum.add_term(p, c);
    }
    Ok(sum)
}

/// Classical decomposition with the single-block term removed.
pub fn stripped_classical(n: u32, convention: Convention) -> Result<FormalSum, PartitionError> {
    Ok(classical_decomposition_with(n, convention)?.filter_k(|k| k != 1))
}

/// Strata by block count: `t1` (k = 1), `t2` (k = 3), `t3` (k >= 5).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreePartSplit {
    pub t1: FormalSum,
    pub t2: FormalSum,
    pub t3: FormalSum,
}

impl ThreePartSplit {
    pub fn reassemble(&self) -> FormalSum {
        self.t1.plus(&self.t2).plus(&self.t3)
    }
}

/// Splits the classical decomposition by block count. For `n` in {1, 3}
/// the higher strata are simply empty.
pub fn three_part_split(n: u32) -> Result<ThreePartSplit, PartitionError> {
    let full = classical_decomposition(n)?;
    Ok(ThreePartSplit { t1: full.filter_k(|k| k == 1), t2: full.filter_k(|k| k == 3), t3: full.filter_k(|k| k >= 5) })
}

/// `sum over I in triplets(n) of C_I * prod_l tau^{i_l + 1}`, each factor
/// replaced by its classical decomposition.
pub fn tree_reconstruction_rhs(n: u32, convention: Convention) -> Result<FormalSum, PartitionError> {
    triplet_expansion(n, convention, false, Execution::default())
}

/// As [`tree_reconstruction_rhs`] with the first (largest) factor stripped
/// of its single-block term.
pub fn marked_tree_expansion(n: u32, convention: Convention) -> Result<FormalSum, PartitionError> {
    triplet_expansion(n, convention, true, Execution::default())
}

fn triplet_expansion(
    n: u32,
    convention: Convention,
    strip_first: bool,
    exec: Execution,
) -> Result<FormalSum, PartitionError> {
    require_odd(n, 3)?;
    let triplets = enumerate_odd_profiles(n, Some(3))?;
    let parts = exec.try_map(&triplets, |triplet| -> Result<FormalSum, PartitionError> {
        let [i1, i2, i3] = [triplet.parts()[0], triplet.parts()[1], triplet.parts()[2]];
        let first = if strip_first {
            stripped_classical(i1, convention)?
        } else {
            classical_decomposition_with(i1, convention)?
        };
        let product = first
            .times(&classical_decomposition_with(i2, convention)?)
            .times(&classical_decomposition_with(i3, convention)?);
        Ok(product.scaled(&convention.coefficient(triplet)))
    })?;
    Ok(parts.iter().fold(FormalSum::empty(n), |acc, s| acc.plus(s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratum {
    T1,
    T2,
    T3,
}

impl Stratum {
    fn of(k: u32) -> Self {
        match k {
            1 => Stratum::T1,
            3 => Stratum::T2,
            _ => Stratum::T3,
        }
    }
}

/// One profile of the audit table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub profile: OddProfile,
    pub k: u32,
    pub classical_coeff: Coefficient,
    pub rhs_coeff_setpart: Coefficient,
    pub rhs_coeff_multinomial: Coefficient,
    pub stratum: Stratum,
    pub classical_coeff_multinomial: Coefficient,
    /// Coefficient of `tau - T1` (set-partition convention).
    pub lhs_coeff_setpart: Coefficient,
    pub lhs_coeff_multinomial: Coefficient,
    /// Coefficient of the marked expansion (first factor stripped).
    pub marked_coeff_setpart: Coefficient,
    pub marked_coeff_multinomial: Coefficient,
    pub tree_mismatch_setpart: bool,
    pub tree_mismatch_multinomial: bool,
    /// Marked expansion versus the `T3` stratum.
    pub marked_mismatch_setpart: bool,
}

/// Side-by-side comparison of the classical decomposition, the triplet
/// reconstruction and its marked variant. Differences are reported, never
/// asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityAudit {
    pub n: u32,
    pub rows: Vec<AuditRow>,
    pub tree_mismatches_setpart: Vec<OddProfile>,
    pub tree_mismatches_multinomial: Vec<OddProfile>,
    pub marked_mismatches_setpart: Vec<OddProfile>,
}

pub fn identity_audit(n: u32) -> Result<IdentityAudit, PartitionError> {
    require_odd(n, 5)?;
    if n > AUDIT_LIMIT {
        return Err(PartitionError::OracleScaleExceeded { n, limit: AUDIT_LIMIT });
    }
    let sp = Convention::SetPartition;
    let mn = Convention::Multinomial;
    let classical = classical_decomposition_with(n, sp)?;
    let classical_m = classical_decomposition_with(n, mn)?;
    let lhs = classical.filter_k(|k| k != 1);
    let lhs_m = classical_m.filter_k(|k| k != 1);
    let t3 = classical.filter_k(|k| k >= 5);
    let rhs = tree_reconstruction_rhs(n, sp)?;
    let rhs_m = tree_reconstruction_rhs(n, mn)?;
    let marked = marked_tree_expansion(n, sp)?;
    let marked_m = marked_tree_expansion(n, mn)?;

    let rows: Vec<AuditRow> = classical
        .profiles()
        .map(|p| AuditRow {
            profile: p.clone(),
            k: p.k(),
            classical_coeff: Coefficient(classical.get(p)),
            rhs_coeff_setpart: Coefficient(rhs.get(p)),
            rhs_coeff_multinomial: Coefficient(rhs_m.get(p)),
            stratum: Stratum::of(p.k()),
            classical_coeff_multinomial: Coefficient(classical_m.get(p)),
            lhs_coeff_setpart: Coefficient(lhs.get(p)),
            lhs_coeff_multinomial: Coefficient(lhs_m.get(p)),
            marked_coeff_setpart: Coefficient(marked.get(p)),
            marked_coeff_multinomial: Coefficient(marked_m.get(p)),
            tree_mismatch_setpart: lhs.get(p) != rhs.get(p),
            tree_mismatch_multinomial: lhs_m.get(p) != rhs_m.get(p),
            marked_mismatch_setpart: t3.get(p) != marked.get(p),
        })
        .collect();
    let pick = |f: fn(&AuditRow) -> bool| rows.iter().filter(|r| f(r)).map(|r| r.profile.clone()).collect();
    Ok(IdentityAudit {
        n,
        tree_mismatches_setpart: pick(|r| r.tree_mismatch_setpart),
        tree_mismatches_multinomial: pick(|r| r.tree_mismatch_multinomial),
        marked_mismatches_setpart: pick(|r| r.marked_mismatch_setpart),
        rows,
    })
}

/// Lower bound on `T1 + T2` in the negative-sign case:
/// `(|C^{n+1}_min| / 6 lambda) * (1 - 2 delta_{n,max} / (n (n-1)))`.
pub fn t1_plus_t2_lower_bound(
    n: u32,
    momenta: &[Momentum4],
    evaluator: &EnvelopeEvaluator,
) -> Result<f64, DecompositionError> {
    require_odd(n, 5)?;
    if sign_of_h(n)? != -1 {
        return Err(DecompositionError::WrongSignCase { n });
    }
    let c = evaluator.c_bound(n, momenta, EnvelopeMode::Min)?;
    let bracket = evaluator.bounds().bracket(n)?;
    Ok(c / (6.0 * evaluator.params().lambda()) * bracket)
}
