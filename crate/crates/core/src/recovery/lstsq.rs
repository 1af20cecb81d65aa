use nalgebra::{DMatrix, DVector};

use super::{RecoveryStatus, SparseSolution};
use crate::collocation::CollocationSystem;
use crate::linalg;
use crate::multiindex::IndexSet;
use crate::{CfcError, Result};

/// Minimizes `|b - A z|` over `z` supported on `support`, through a singular
/// value decomposition of the selected columns. Numerically dependent columns
/// yield the minimum-norm solution and set `rank_deficient`.
pub fn least_squares_on_support(
    system: &CollocationSystem,
    support: &IndexSet,
) -> Result<SparseSolution> {
    let dim = system.plan().dim();
    let positions = support
        .iter()
        .map(|nu| {
            system
                .column_position(nu)
                .ok_or_else(|| CfcError::UnknownColumn(nu.to_string()))
        })
        .collect::<Result<Vec<usize>>>()?;
    let b = system.rhs();
    if positions.is_empty() {
        let mut sol = SparseSolution::new(dim, [], RecoveryStatus::Completed);
        sol.residual_history.push(linalg::norm(b));
        return Ok(sol);
    }

    let m = system.rows();
    let mut data = Vec::with_capacity(m * positions.len());
    for &j in &positions {
        data.extend_from_slice(system.column(j));
    }
    let a = DMatrix::from_vec(m, positions.len(), data);
    let rhs = DVector::from_column_slice(b);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = f64::EPSILON * m.max(positions.len()) as f64 * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let z = svd
        .solve(&rhs, eps)
        .map_err(|e| CfcError::InvalidArgument(e.to_string()))?;
    let residual = (&rhs - &a * &z).norm();

    let entries = support.iter().cloned().zip(z.iter().copied());
    let mut sol = SparseSolution::new(dim, entries, RecoveryStatus::Completed);
    sol.index_set = support.clone();
    sol.residual_history.push(residual);
    sol.iterations = 1;
    sol.rank_deficient = rank < positions.len();
    Ok(sol)
}
