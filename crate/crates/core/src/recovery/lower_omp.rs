use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::omp::STALL_TOL;
use super::{select_max, GreedyFit, IterationRecord, RecoveryStatus, SparseSolution, CONVERGENCE_TOL};
use crate::collocation::{ColumnAssembler, SamplePlan};
use crate::linalg;
use crate::multiindex::{reflection_family, IndexSet, LowerSet, MultiIndex};
use crate::problem::ProblemSpec;
use crate::{CfcError, Result};

/// Margin columns are assembled in batches of this many.
const BATCH: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LowerOmpCaps {
    /// Stop before the index set would grow beyond this size.
    pub max_support: Option<usize>,
    /// Memory budget for cached normalized margin columns; columns beyond it
    /// are re-assembled whenever they are scanned.
    pub cache_bytes: usize,
}

impl Default for LowerOmpCaps {
    fn default() -> Self {
        LowerOmpCaps {
            max_support: None,
            cache_bytes: 1 << 30,
        }
    }
}

impl LowerOmpCaps {
    pub fn with_max_support(max_support: usize) -> Self {
        LowerOmpCaps {
            max_support: Some(max_support),
            ..Default::default()
        }
    }
}

/// Adaptive lower OMP: grows a lower, reflection-closed index set one
/// reflection family at a time, choosing the reduced-margin index whose
/// normalized column correlates best with the residual.
pub fn adaptive_lower_omp(
    problem: &ProblemSpec,
    plan: &SamplePlan,
    k: usize,
    caps: LowerOmpCaps,
) -> Result<SparseSolution> {
    adaptive_lower_omp_with(problem, plan, k, caps, |_, _| Ok(()))
}

/// [`adaptive_lower_omp`] with an observer called after every iteration with
/// the step record and the current index set.
pub fn adaptive_lower_omp_with<F>(
    problem: &ProblemSpec,
    plan: &SamplePlan,
    k: usize,
    caps: LowerOmpCaps,
    mut observer: F,
) -> Result<SparseSolution>
where
    F: FnMut(&IterationRecord, &LowerSet) -> Result<()>,
{
    if k == 0 {
        return Err(CfcError::InvalidArgument("K must be positive".into()));
    }
    let dim = plan.dim();
    let assembler = ColumnAssembler::new(problem, plan)?;
    let b = assembler.rhs(problem);
    let b_norm = linalg::norm(&b);
    let mut lower = LowerSet::new(dim);
    if b_norm == 0.0 {
        let mut sol = SparseSolution::new(dim, [], RecoveryStatus::Converged);
        sol.residual_history.push(0.0);
        return Ok(sol);
    }

    let col_bytes = plan.m() * std::mem::size_of::<Complex64>();
    let mut cache = ColumnCache::new(caps.cache_bytes / col_bytes.max(1));
    let mut fit = GreedyFit::new(&b);
    let mut status = RecoveryStatus::Completed;

    for iteration in 1..=k {
        let r = fit.qr.residual();
        let r_norm = linalg::norm(r);
        let scores = cache.score_margin(&assembler, lower.margin(), r)?;
        let picked = select_max(scores.iter().map(|(nu, s)| (nu, *s)));
        let nu = match picked {
            Some((nu, score)) if score > STALL_TOL * r_norm => nu.clone(),
            _ => {
                status = RecoveryStatus::Stalled;
                break;
            }
        };
        if let Some(cap) = caps.max_support {
            if lower.len() + reflection_family(&nu).len() > cap {
                status = RecoveryStatus::SupportCapReached;
                break;
            }
        }
        for mu in lower.insert_family(&nu)? {
            let (column, d) = cache.take(&assembler, &mu)?;
            fit.add(mu, &column, d);
        }
        let residual = fit.end_iteration();
        let record = IterationRecord {
            iteration,
            index_set_size: lower.len(),
            residual,
            selected: nu,
        };
        observer(&record, &lower)?;
        if residual <= CONVERGENCE_TOL * b_norm {
            status = RecoveryStatus::Converged;
            break;
        }
    }
    Ok(fit.finish(lower.members().clone(), status))
}

/// Normalized margin columns with their norms, bounded in count.
struct ColumnCache {
    columns: HashMap<MultiIndex, (Vec<Complex64>, f64)>,
    capacity: usize,
}

fn normalized(mut column: Vec<Complex64>) -> (Vec<Complex64>, f64) {
    let d = linalg::norm(&column);
    if d > 0.0 {
        column.iter_mut().for_each(|a| *a /= d);
    }
    (column, d)
}

impl ColumnCache {
    fn new(capacity: usize) -> Self {
        ColumnCache {
            columns: HashMap::new(),
            capacity,
        }
    }

    /// `|<a_nu / d_nu, r>|` for every margin index, in margin order.
    fn score_margin(
        &mut self,
        assembler: &ColumnAssembler<'_>,
        margin: &IndexSet,
        r: &[Complex64],
    ) -> Result<Vec<(MultiIndex, f64)>> {
        let score = |(col, d): &(Vec<Complex64>, f64)| {
            if *d > 0.0 {
                linalg::dot(col, r).norm()
            } else {
                0.0
            }
        };
        let margin = margin.to_vec();
        let mut scores: Vec<Option<f64>> = margin
            .par_iter()
            .map(|nu| self.columns.get(nu).map(score))
            .collect();
        let missing: Vec<usize> = (0..margin.len()).filter(|&i| scores[i].is_none()).collect();
        for chunk in missing.chunks(BATCH) {
            let fresh: Vec<(Vec<Complex64>, f64)> = chunk
                .par_iter()
                .map(|&i| assembler.column(&margin[i]).map(normalized))
                .collect::<Result<_>>()?;
            for (&i, entry) in chunk.iter().zip(fresh) {
                scores[i] = Some(score(&entry));
                if self.columns.len() < self.capacity {
                    self.columns.insert(margin[i].clone(), entry);
                }
            }
        }
        Ok(margin
            .into_iter()
            .zip(scores)
            .map(|(nu, s)| (nu, s.expect("every margin index scored")))
            .collect())
    }

    /// Removes and returns a column, assembling it when it was not cached.
    fn take(
        &mut self,
        assembler: &ColumnAssembler<'_>,
        nu: &MultiIndex,
    ) -> Result<(Vec<Complex64>, f64)> {
        match self.columns.remove(nu) {
            Some(entry) => Ok(entry),
            None => assembler.column(nu).map(normalized),
        }
    }
}
