//! Sparse recovery engines for the collocation system.
//!
//! * [`omp`]: orthogonal matching pursuit over a fixed set of columns;
//! * [`adaptive_lower_omp`]: OMP over lower index sets grown through the reduced
//!   margin, assembling columns on demand;
//! * [`sr_lasso`]: square-root LASSO by a primal-dual splitting;
//! * [`least_squares_on_support`]: restricted least squares.
//!
//! All engines return coefficients in the column basis of the system, that is,
//! for the rescaled modes `Psi_nu`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;

use crate::analysis::RieszConstants;
use crate::linalg::IncrementalQr;
use crate::multiindex::{IndexSet, MultiIndex};
use crate::{CfcError, Result};

mod lower_omp;
mod lstsq;
mod omp;
mod srlasso;

pub use lower_omp::{adaptive_lower_omp, adaptive_lower_omp_with, LowerOmpCaps};
pub use lstsq::least_squares_on_support;
pub use omp::{omp, omp_with};
pub use srlasso::{sr_lasso, SrLassoConfig};

/// Relative residual below which greedy solvers stop as converged.
pub const CONVERGENCE_TOL: f64 = 1e-14;
/// Relative slack of the greedy argmax; the lowest canonical index within it wins.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecoveryStatus {
    /// Ran the requested number of iterations.
    Completed,
    /// Residual dropped below `CONVERGENCE_TOL * |b|`.
    Converged,
    /// All candidate columns are numerically orthogonal to the residual.
    Stalled,
    /// The next selection would push the index set above the support cap.
    SupportCapReached,
    /// An iterative solver exhausted its iteration budget.
    MaxIterations,
}

impl RecoveryStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecoveryStatus::Completed => "completed",
            RecoveryStatus::Converged => "converged",
            RecoveryStatus::Stalled => "stalled",
            RecoveryStatus::SupportCapReached => "support_cap",
            RecoveryStatus::MaxIterations => "max_iterations",
        }
    }
}

impl fmt::Display for RecoveryStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct SparseSolution {
    /// Nonzero coefficients, keyed by column index.
    pub coefficients: BTreeMap<MultiIndex, Complex64>,
    /// Key set of `coefficients`.
    pub support: IndexSet,
    /// `|b - A z|` after each iteration.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub status: RecoveryStatus,
    /// Set when a least-squares solve met a numerically dependent column.
    pub rank_deficient: bool,
    /// Index set the solver worked on (the lower set for adaptive OMP).
    pub index_set: IndexSet,
    /// SR-LASSO objective of the returned iterate.
    pub objective: Option<f64>,
    /// Best objective found up to each iteration (SR-LASSO only).
    pub objective_history: Vec<f64>,
}

impl SparseSolution {
    fn new(
        dim: usize,
        entries: impl IntoIterator<Item = (MultiIndex, Complex64)>,
        status: RecoveryStatus,
    ) -> Self {
        let coefficients: BTreeMap<MultiIndex, Complex64> = entries
            .into_iter()
            .filter(|(_, c)| *c != Complex64::default())
            .collect();
        let mut support = IndexSet::new(dim);
        for nu in coefficients.keys() {
            support
                .insert(nu.clone())
                .expect("solution indices share the system dimension");
        }
        SparseSolution {
            coefficients,
            index_set: support.clone(),
            support,
            residual_history: Vec::new(),
            iterations: 0,
            status,
            rank_deficient: false,
            objective: None,
            objective_history: Vec::new(),
        }
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    /// Coefficients in column order of `columns`, zero where absent.
    pub fn dense(&self, columns: &[MultiIndex]) -> Vec<Complex64> {
        columns
            .iter()
            .map(|nu| self.coefficients.get(nu).copied().unwrap_or_default())
            .collect()
    }
}

/// One greedy step, as streamed to traces.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub index_set_size: usize,
    pub residual: f64,
    pub selected: MultiIndex,
}

/// CSV trace `iteration,index_set_size,residual,selected`.
pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W) -> Result<Self> {
        writeln!(out, "iteration,index_set_size,residual,selected")?;
        Ok(TraceWriter { out })
    }

    pub fn record(&mut self, r: &IterationRecord) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{:e},\"{}\"",
            r.iteration, r.index_set_size, r.residual, r.selected
        )?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Admissible SR-LASSO parameter interval `(0, 3 b / (14 B) sqrt(B / s)]`.
/// The upper end is the suggested value.
pub fn lambda_range(constants: &RieszConstants, s: usize) -> Result<(f64, f64)> {
    if constants.b_phi <= 0.0 {
        return Err(CfcError::NonPositiveRieszBound(constants.b_phi));
    }
    if s == 0 {
        return Err(CfcError::InvalidArgument("sparsity must be positive".into()));
    }
    let (b, big_b) = (constants.b_phi, constants.big_b_phi);
    Ok((0.0, 3.0 * b / (14.0 * big_b) * (big_b / s as f64).sqrt()))
}

/// Least-squares state shared by the greedy solvers: the thin QR of the
/// normalized selected columns plus their norms.
struct GreedyFit {
    qr: IncrementalQr,
    fitted: Vec<(MultiIndex, f64)>,
    residual_history: Vec<f64>,
    iterations: usize,
    rank_deficient: bool,
}

impl GreedyFit {
    fn new(b: &[Complex64]) -> Self {
        GreedyFit {
            qr: IncrementalQr::new(b),
            fitted: Vec::new(),
            residual_history: Vec::new(),
            iterations: 0,
            rank_deficient: false,
        }
    }

    /// Adds a column already divided by its norm `d`.
    fn add(&mut self, nu: MultiIndex, normalized: &[Complex64], d: f64) {
        if self.qr.push(normalized) {
            self.fitted.push((nu, d));
        } else {
            self.rank_deficient = true;
        }
    }

    fn end_iteration(&mut self) -> f64 {
        self.iterations += 1;
        let r = self.qr.residual_norm();
        self.residual_history.push(r);
        r
    }

    /// De-normalizes the least-squares solution: `c_nu = z_nu / d_nu`.
    fn finish(self, index_set: IndexSet, status: RecoveryStatus) -> SparseSolution {
        let z = self.qr.solve();
        let entries = self
            .fitted
            .into_iter()
            .zip(z)
            .map(|((nu, d), zj)| (nu, zj / d));
        let mut sol = SparseSolution::new(index_set.dim(), entries, status);
        sol.index_set = index_set;
        sol.residual_history = self.residual_history;
        sol.iterations = self.iterations;
        sol.rank_deficient = self.rank_deficient;
        sol
    }
}

/// Greedy argmax with deterministic tie-breaking: among scores within
/// `TIE_TOL` of the maximum, the smallest key wins.
fn select_max<'a, I>(scores: I) -> Option<(&'a MultiIndex, f64)>
where
    I: IntoIterator<Item = (&'a MultiIndex, f64)>,
{
    let scores: Vec<(&MultiIndex, f64)> = scores.into_iter().collect();
    let max = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    scores
        .into_iter()
        .filter(|s| s.1 >= max * (1.0 - TIE_TOL))
        .min_by(|a, b| a.0.cmp(b.0))
}
