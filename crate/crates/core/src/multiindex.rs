//! Multi-index combinatorics on `Z^d`.
//!
//! Frequencies are signed integer vectors. The partial order used throughout
//! compares absolute values: `mu <= nu` iff `|mu_i| <= |nu_i|` for every `i`.
//! A set is *lower* when it contains every index below each of its members, which
//! makes lower sets automatically symmetric under coordinate sign flips.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use crate::{CfcError, Result};

/// Default cap on the cardinality bound accepted by [`enumerate_hyperbolic_cross`].
pub const DEFAULT_CARDINALITY_CAP: usize = 10_000_000;

/// An integer frequency vector.
///
/// Ordering is lexicographic on the raw signed entries; this is the canonical
/// order used for matrix columns and for deterministic tie-breaking.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(entries: Vec<i32>) -> Self {
        assert!(!entries.is_empty(), "multi-index dimension must be positive");
        MultiIndex(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex::new(vec![0; dim])
    }

    /// `sign * e_k`.
    pub fn unit(dim: usize, k: usize, sign: i32) -> Self {
        let mut e = vec![0; dim];
        e[k] = sign;
        MultiIndex::new(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// Number of nonzero entries.
    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&v| v != 0).count()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&v| (v as f64) * (v as f64)).sum()
    }

    pub fn dot(&self, other: &MultiIndex) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as f64 * b as f64)
            .sum()
    }

    /// `prod_k (|nu_k| + 1)`, saturating.
    pub fn cross_weight(&self) -> u64 {
        self.0
            .iter()
            .fold(1u64, |acc, &v| acc.saturating_mul(v.unsigned_abs() as u64 + 1))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|v| -v).collect())
    }

    /// `self ⪯ other`: componentwise comparison of absolute values.
    pub fn precedes(&self, other: &MultiIndex) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .all(|(a, b)| a.unsigned_abs() <= b.unsigned_abs())
    }

    /// `self ≺ other`: `self ⪯ other` with at least one strict inequality.
    pub fn strictly_precedes(&self, other: &MultiIndex) -> bool {
        self.precedes(other)
            && self
                .0
                .iter()
                .zip(&other.0)
                .any(|(a, b)| a.unsigned_abs() < b.unsigned_abs())
    }

    /// Indices obtained by moving one nonzero coordinate one step towards zero.
    pub fn immediate_predecessors(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        self.0.iter().enumerate().filter(|(_, &v)| v != 0).map(move |(k, &v)| {
            let mut p = self.0.clone();
            p[k] -= v.signum();
            MultiIndex(p)
        })
    }

    /// Indices obtained by moving one coordinate one step away from zero
    /// (both directions for zero coordinates).
    pub fn immediate_successors(&self) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for (k, &v) in self.0.iter().enumerate() {
            if v == 0 {
                for s in [-1, 1] {
                    let mut p = self.0.clone();
                    p[k] = s;
                    out.push(MultiIndex(p));
                }
            } else {
                let mut p = self.0.clone();
                p[k] += v.signum();
                out.push(MultiIndex(p));
            }
        }
        out
    }

    /// Indices differing from `self` by the sign of exactly one nonzero entry.
    fn single_reflections(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        self.0.iter().enumerate().filter(|(_, &v)| v != 0).map(move |(k, _)| {
            let mut p = self.0.clone();
            p[k] = -p[k];
            MultiIndex(p)
        })
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i32>> for MultiIndex {
    fn from(v: Vec<i32>) -> Self {
        MultiIndex::new(v)
    }
}

impl<const D: usize> From<[i32; D]> for MultiIndex {
    fn from(v: [i32; D]) -> Self {
        MultiIndex::new(v.to_vec())
    }
}

/// A finite set of multi-indices of a common dimension, kept in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    dim: usize,
    members: BTreeSet<MultiIndex>,
}

impl IndexSet {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        IndexSet {
            dim,
            members: BTreeSet::new(),
        }
    }

    pub fn from_indices<I>(dim: usize, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = MultiIndex>,
    {
        let mut set = IndexSet::new(dim);
        for nu in indices {
            set.insert(nu)?;
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.members.contains(nu)
    }

    /// Inserts `nu`, returning whether it was new.
    pub fn insert(&mut self, nu: MultiIndex) -> Result<bool> {
        if nu.dim() != self.dim {
            return Err(CfcError::DimensionMismatch {
                expected: self.dim,
                got: nu.dim(),
            });
        }
        Ok(self.members.insert(nu))
    }

    pub fn remove(&mut self, nu: &MultiIndex) -> bool {
        self.members.remove(nu)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    pub fn to_vec(&self) -> Vec<MultiIndex> {
        self.members.iter().cloned().collect()
    }

    pub fn union_with(&mut self, other: &IndexSet) -> Result<()> {
        for nu in other.iter() {
            self.insert(nu.clone())?;
        }
        Ok(())
    }

    /// Writes the line-oriented text form: a `d=<dim>` header followed by
    /// one index per line as space-separated signed integers.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "d={}", self.dim)?;
        for nu in &self.members {
            let line: Vec<String> = nu.entries().iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| CfcError::Parse("missing `d=<dim>` header".into()))?;
        let dim: usize = header
            .strip_prefix("d=")
            .and_then(|v| v.trim().parse().ok())
            .filter(|&d| d >= 1)
            .ok_or_else(|| CfcError::Parse(format!("bad header `{header}`")))?;
        let mut set = IndexSet::new(dim);
        for line in lines {
            let entries = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<i32>()
                        .map_err(|_| CfcError::Parse(format!("bad integer `{tok}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if entries.len() != dim {
                return Err(CfcError::Parse(format!(
                    "line `{line}` has {} entries, expected {dim}",
                    entries.len()
                )));
            }
            set.insert(MultiIndex::new(entries))?;
        }
        Ok(set)
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::collections::btree_set::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// `min{4 n^5 16^d, e^2 n^(2 + log2 d)}`, the classical upper bound on the
/// hyperbolic cross cardinality.
pub fn hyperbolic_cross_bound(d: usize, n: usize) -> f64 {
    let (df, nf) = (d as f64, n as f64);
    let first = 4.0 * nf.powi(5) * 16f64.powf(df);
    let second = std::f64::consts::E.powi(2) * nf.powf(2.0 + df.log2());
    first.min(second)
}

/// Enumerates `{nu in Z^d : prod_k (|nu_k| + 1) <= n}` in canonical order,
/// rejecting requests whose cardinality bound exceeds the default cap.
pub fn enumerate_hyperbolic_cross(d: usize, n: usize) -> Result<Vec<MultiIndex>> {
    enumerate_hyperbolic_cross_capped(d, n, DEFAULT_CARDINALITY_CAP)
}

pub fn enumerate_hyperbolic_cross_capped(d: usize, n: usize, cap: usize) -> Result<Vec<MultiIndex>> {
    if d == 0 || n == 0 {
        return Err(CfcError::InvalidArgument(
            "hyperbolic cross needs d >= 1 and n >= 1".into(),
        ));
    }
    let bound = hyperbolic_cross_bound(d, n);
    if bound > cap as f64 {
        return Err(CfcError::IndexSetTooLarge { bound, cap });
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(d);
    descend(d, n, &mut prefix, &mut out);
    Ok(out)
}

// Coordinates are visited in increasing order at every level, so the output is
// already lexicographic.
fn descend(d: usize, budget: usize, prefix: &mut Vec<i32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() == d {
        out.push(MultiIndex(prefix.clone()));
        return;
    }
    let reach = budget as i32 - 1;
    for v in -reach..=reach {
        let weight = v.unsigned_abs() as usize + 1;
        prefix.push(v);
        descend(d, budget / weight, prefix, out);
        prefix.pop();
    }
}

/// Lower-set test via closure under immediate predecessors and single sign
/// flips, which together generate the whole order ideal of each member.
pub fn is_lower(set: &IndexSet) -> bool {
    set.iter().all(|nu| {
        nu.immediate_predecessors().all(|p| set.contains(&p))
            && nu.single_reflections().all(|p| set.contains(&p))
    })
}

fn in_margin(set: &IndexSet, nu: &MultiIndex) -> bool {
    !set.contains(nu) && nu.immediate_predecessors().all(|p| set.contains(&p))
}

/// Reduced margin of a lower set; `R(∅) = {0}`.
pub fn reduced_margin(set: &IndexSet) -> Result<IndexSet> {
    if !is_lower(set) {
        return Err(CfcError::NotLower);
    }
    let mut margin = IndexSet::new(set.dim());
    if set.is_empty() {
        margin.insert(MultiIndex::zeros(set.dim()))?;
        return Ok(margin);
    }
    for nu in set.iter() {
        for cand in nu.immediate_successors() {
            if in_margin(set, &cand) {
                margin.insert(cand)?;
            }
        }
    }
    Ok(margin)
}

/// All `mu` with `|mu_i| = |nu_i|` for every `i`.
pub fn reflection_family(nu: &MultiIndex) -> IndexSet {
    let nonzero: Vec<usize> = (0..nu.dim()).filter(|&k| nu.entries()[k] != 0).collect();
    let mut family = IndexSet::new(nu.dim());
    for mask in 0u64..(1u64 << nonzero.len()) {
        let mut e = nu.entries().to_vec();
        for (bit, &k) in nonzero.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                e[k] = -e[k];
            }
        }
        family.members.insert(MultiIndex(e));
    }
    family
}

/// A lower set grown one reflection family at a time, with its reduced margin
/// maintained incrementally.
#[derive(Clone, Debug)]
pub struct LowerSet {
    members: IndexSet,
    margin: IndexSet,
}

impl LowerSet {
    pub fn new(dim: usize) -> Self {
        let mut margin = IndexSet::new(dim);
        margin.members.insert(MultiIndex::zeros(dim));
        LowerSet {
            members: IndexSet::new(dim),
            margin,
        }
    }

    pub fn members(&self) -> &IndexSet {
        &self.members
    }

    pub fn margin(&self) -> &IndexSet {
        &self.margin
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Adds the reflection family of a margin index and returns the newly added
    /// indices in canonical order.
    pub fn insert_family(&mut self, nu: &MultiIndex) -> Result<Vec<MultiIndex>> {
        if !self.margin.contains(nu) {
            return Err(CfcError::InvalidArgument(format!(
                "{nu} is not in the reduced margin"
            )));
        }
        let added = reflection_family(nu).to_vec();
        for mu in &added {
            self.margin.remove(mu);
            self.members.members.insert(mu.clone());
        }
        for mu in &added {
            for cand in mu.immediate_successors() {
                if in_margin(&self.members, &cand) {
                    self.margin.members.insert(cand);
                }
            }
        }
        Ok(added)
    }
}
