//! Odd-part integer partitions, odd-block set partitions and the tree counts.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest `n` accepted by the exhaustive set-partition enumerator.
pub const SET_PARTITION_ORACLE_LIMIT: u32 = 11;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("n must be odd and >= {min} (got {n})")]
    BadOrder { n: u32, min: u32 },
    #[error("no partition of {n} into {k} odd parts exists")]
    IncompatiblePartCount { n: u32, k: u32 },
    #[error("part {0} is not an odd positive integer")]
    BadPart(u32),
    #[error("oracle scale exceeded: n = {n} > {limit}")]
    OracleScaleExceeded { n: u32, limit: u32 },
}

pub(crate) fn require_odd(n: u32, min: u32) -> Result<(), PartitionError> {
    if n < min || n.is_multiple_of(2) {
        Err(PartitionError::BadOrder { n, min })
    } else {
        Ok(())
    }
}

/// Multiset of odd block sizes, stored non-increasing.
///
/// Profiles sort in lexicographically *decreasing* order of their parts, so
/// `(3) < (1,1,1)` and `(5,1,1) < (3,3,1)`; ordered maps iterate in the
/// order reports print them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OddProfile {
    parts: Vec<u32>,
}

impl OddProfile {
    /// Sorts `parts` non-increasing; every part must be odd.
    pub fn new(mut parts: Vec<u32>) -> Result<Self, PartitionError> {
        if parts.is_empty() {
            return Err(PartitionError::BadOrder { n: 0, min: 1 });
        }
        if let Some(&p) = parts.iter().find(|&&p| p % 2 == 0) {
            return Err(PartitionError::BadPart(p));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    /// The single-block profile `(n)`.
    pub fn single(n: u32) -> Self {
        Self { parts: vec![n] }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn n(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn k(&self) -> u32 {
        self.parts.len() as u32
    }

    /// Block-wise union of two profiles (profile of the product of blocks).
    pub fn merge(&self, other: &OddProfile) -> OddProfile {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        OddProfile { parts }
    }

    /// Multiplicity of each distinct part size.
    pub fn multiplicities(&self) -> BTreeMap<u32, u32> {
        let mut m = BTreeMap::new();
        for &p in &self.parts {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }
}

impl Ord for OddProfile {
    fn cmp(&self, other: &Self) -> Ordering {
        other.parts.cmp(&self.parts)
    }
}

impl PartialOrd for OddProfile {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for OddProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for OddProfile {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A partition of `{1, ..., n}` into blocks of odd size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSetPartition {
    blocks: Vec<Vec<u32>>,
    profile: OddProfile,
}

impl LabeledSetPartition {
    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn profile(&self) -> &OddProfile {
        &self.profile
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeCounts {
    pub t_n: u64,
    pub t_tilde_n: u64,
}

/// All partitions of odd `n` into odd parts, optionally with exactly `k`
/// parts, in lexicographically decreasing order.
pub fn enumerate_odd_profiles(n: u32, k: Option<u32>) -> Result<Vec<OddProfile>, PartitionError> {
    require_odd(n, 1)?;
    if let Some(k) = k {
        if k == 0 || k > n || !(n - k).is_multiple_of(2) {
            return Err(PartitionError::IncompatiblePartCount { n, k });
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    descend(n, largest_odd_at_most(n), k, &mut current, &mut out);
    Ok(out)
}

fn largest_odd_at_most(x: u32) -> u32 {
    if x % 2 == 1 {
        x
    } else {
        x - 1
    }
}

fn descend(remaining: u32, max_part: u32, k: Option<u32>, current: &mut Vec<u32>, out: &mut Vec<OddProfile>) {
    if remaining == 0 {
        if k.is_none_or(|k| current.len() as u32 == k) {
            out.push(OddProfile { parts: current.clone() });
        }
        return;
    }
    if let Some(k) = k {
        if current.len() as u32 >= k {
            return;
        }
    }
    let mut part = largest_odd_at_most(max_part.min(remaining));
    while part >= 1 {
        current.push(part);
        descend(remaining - part, part, k, current, out);
        current.pop();
        if part < 2 {
            break;
        }
        part -= 2;
    }
}

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Number of labeled set partitions of `{1..n}` whose block sizes are the
/// profile: `n! / (prod j_l! * prod mult_c!)`.
pub fn set_partition_count(profile: &OddProfile) -> BigUint {
    let automorphisms = profile.multiplicities().values().fold(BigUint::one(), |acc, &m| acc * factorial(m));
    multinomial_count(profile) / automorphisms
}

/// Plain multinomial `n! / prod j_l!` (no automorphism factor).
pub fn multinomial_count(profile: &OddProfile) -> BigUint {
    let denom = profile.parts.iter().fold(BigUint::one(), |acc, &j| acc * factorial(j));
    factorial(profile.n()) / denom
}

/// Exhaustive list of set partitions of `{1..n}` into odd blocks.
///
/// Blocks are ordered by their smallest label and hold labels ascending.
pub fn enumerate_set_partitions_odd(n: u32) -> Result<Vec<LabeledSetPartition>, PartitionError> {
    require_odd(n, 1)?;
    if n > SET_PARTITION_ORACLE_LIMIT {
        return Err(PartitionError::OracleScaleExceeded { n, limit: SET_PARTITION_ORACLE_LIMIT });
    }
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    place(1, n, &mut blocks, &mut out);
    Ok(out)
}

fn place(label: u32, n: u32, blocks: &mut Vec<Vec<u32>>, out: &mut Vec<LabeledSetPartition>) {
    let even = blocks.iter().filter(|b| b.len() % 2 == 0).count() as u32;
    // each even block needs one more label to become odd
    if even > n + 1 - label {
        return;
    }
    if label > n {
        if even == 0 {
            let profile = OddProfile::new(blocks.iter().map(|b| b.len() as u32).collect()).expect("odd blocks");
            out.push(LabeledSetPartition { blocks: blocks.clone(), profile });
        }
        return;
    }
    for i in 0..blocks.len() {
        blocks[i].push(label);
        place(label + 1, n, blocks, out);
        blocks[i].pop();
    }
    blocks.push(vec![label]);
    place(label + 1, n, blocks, out);
    blocks.pop();
}

/// Tree counts `T_n` and `T~_n`.
///
/// For `n >= 7`: `T_n = [(n-3)^2/48] + [(n-3)/3] + 1` and `T~_n = T_n - 1`.
/// For `n` in {3, 5} both are 1; a zero `T~` there would annihilate every
/// product of splitting bounds.
pub fn tree_counts(n: u32) -> Result<TreeCounts, PartitionError> {
    require_odd(n, 3)?;
    if n <= 5 {
        return Ok(TreeCounts { t_n: 1, t_tilde_n: 1 });
    }
    let m = u64::from(n - 3);
    let t_tilde_n = m * m / 48 + m / 3;
    Ok(TreeCounts { t_n: t_tilde_n + 1, t_tilde_n })
}
