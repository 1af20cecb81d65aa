use num_complex::Complex64;
use rayon::prelude::*;

use super::{select_max, GreedyFit, IterationRecord, RecoveryStatus, SparseSolution, CONVERGENCE_TOL};
use crate::collocation::CollocationSystem;
use crate::linalg;
use crate::multiindex::IndexSet;
use crate::{CfcError, Result};

/// Correlations below this fraction of the residual norm count as zero.
pub(super) const STALL_TOL: f64 = 1e-13;

/// Orthogonal matching pursuit with `K` greedy picks over the ℓ²-normalized
/// columns of `system`, refitting by least squares after every pick.
pub fn omp(system: &CollocationSystem, k: usize) -> Result<SparseSolution> {
    omp_with(system, k, |_| Ok(()))
}

/// [`omp`] with an observer called after every pick.
pub fn omp_with<F>(system: &CollocationSystem, k: usize, mut observer: F) -> Result<SparseSolution>
where
    F: FnMut(&IterationRecord) -> Result<()>,
{
    let (m, n) = (system.rows(), system.cols());
    if k == 0 || k > m.min(n) {
        return Err(CfcError::InvalidArgument(format!(
            "OMP needs 1 <= K <= min(m, N) = {}, got {k}",
            m.min(n)
        )));
    }
    let dim = system.plan().dim();
    let b = system.rhs();
    let b_norm = linalg::norm(b);
    if b_norm == 0.0 {
        let mut sol = SparseSolution::new(dim, [], RecoveryStatus::Converged);
        sol.residual_history.push(0.0);
        return Ok(sol);
    }

    let norms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| linalg::norm(system.column(j)))
        .collect();
    let columns = system.columns();
    let mut available: Vec<bool> = norms.iter().map(|&d| d > 0.0).collect();
    let mut fit = GreedyFit::new(b);
    let mut index_set = IndexSet::new(dim);
    let mut status = RecoveryStatus::Completed;

    for _ in 0..k {
        let r = fit.qr.residual();
        let r_norm = linalg::norm(r);
        let scores: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .filter(|&j| available[j])
            .map(|j| (j, linalg::dot(system.column(j), r).norm() / norms[j]))
            .collect();
        let picked = select_max(scores.iter().map(|&(j, s)| (&columns[j], s)));
        let nu = match picked {
            Some((nu, score)) if score > STALL_TOL * r_norm => nu.clone(),
            _ => {
                status = RecoveryStatus::Stalled;
                break;
            }
        };
        let j = system.column_position(&nu).expect("picked from the system");
        available[j] = false;
        let normalized: Vec<Complex64> = system.column(j).iter().map(|a| a / norms[j]).collect();
        index_set.insert(nu.clone())?;
        fit.add(nu.clone(), &normalized, norms[j]);
        let residual = fit.end_iteration();
        observer(&IterationRecord {
            iteration: fit.iterations,
            index_set_size: index_set.len(),
            residual,
            selected: nu,
        })?;
        if residual <= CONVERGENCE_TOL * b_norm {
            status = RecoveryStatus::Converged;
            break;
        }
    }
    Ok(fit.finish(index_set, status))
}
