use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{least_squares_on_support, RecoveryStatus, SparseSolution};
use crate::collocation::CollocationSystem;
use crate::linalg;
use crate::multiindex::{IndexSet, MultiIndex};
use crate::{CfcError, Result};

/// Square-root LASSO parameters. `lambda = 0` requests plain least squares.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrLassoConfig {
    pub lambda: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    1e-9
}

fn default_max_iter() -> usize {
    100_000
}

impl SrLassoConfig {
    pub fn new(lambda: f64) -> Self {
        SrLassoConfig {
            lambda,
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(CfcError::InvalidArgument(format!(
                "lambda must be a nonnegative number, got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(CfcError::InvalidArgument(
                "tol and max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `min_z |A z - b|_2 + lambda |z|_1` over complex `z`.
///
/// Chambolle-Pock iteration on the saddle form
/// `min_z max_{|y| <= 1} Re<y, A z - b> + lambda |z|_1` with `sigma = tau = 0.99 / |A|`.
/// Stops once the duality gap of the best iterate falls below
/// `tol (1 + objective)`. The returned iterate is the best one visited, so
/// `objective_history` (best objective so far, one entry per iteration) never
/// increases.
pub fn sr_lasso(system: &CollocationSystem, cfg: &SrLassoConfig) -> Result<SparseSolution> {
    cfg.validate()?;
    let dim = system.plan().dim();
    let columns = system.columns();
    if cfg.lambda == 0.0 {
        let all = IndexSet::from_indices(dim, columns.iter().cloned())?;
        return least_squares_on_support(system, &all);
    }
    let b = system.rhs();
    let n = system.cols();
    let lambda = cfg.lambda;

    let norm_a = linalg::operator_norm(
        n,
        |v| system.apply(v),
        |r| system.adjoint_apply(r),
        1000,
    );
    if norm_a == 0.0 || linalg::norm(b) == 0.0 {
        let mut sol = SparseSolution::new(dim, [], RecoveryStatus::Converged);
        let r = linalg::norm(b);
        sol.residual_history.push(r);
        sol.objective = Some(r);
        sol.objective_history.push(r);
        return Ok(sol);
    }
    let step = 0.99 / norm_a;
    let (sigma, tau) = (step, step);

    let objective = |az: &[Complex64], z: &[Complex64]| -> (f64, f64) {
        let res: f64 = az
            .iter()
            .zip(b)
            .map(|(a, bi)| (a - bi).norm_sqr())
            .sum::<f64>()
            .sqrt();
        (res + lambda * z.iter().map(|c| c.norm()).sum::<f64>(), res)
    };

    let mut z = vec![Complex64::default(); n];
    let mut az = vec![Complex64::default(); system.rows()];
    let mut az_bar = az.clone();
    let mut y = vec![Complex64::default(); system.rows()];
    let (p0, r0) = objective(&az, &z);
    let mut best = (p0, r0, z.clone());
    let mut history = Vec::new();
    let mut residuals = Vec::new();
    let mut status = RecoveryStatus::MaxIterations;
    let mut iterations = 0;

    for _ in 0..cfg.max_iter {
        iterations += 1;
        // dual step: project y + sigma (A z_bar - b) onto the unit ball
        for ((yi, azi), bi) in y.iter_mut().zip(&az_bar).zip(b) {
            *yi += sigma * (azi - bi);
        }
        let ny = linalg::norm(&y);
        if ny > 1.0 {
            y.iter_mut().for_each(|v| *v /= ny);
        }
        // primal step: complex soft-thresholding
        let aty = system.adjoint_apply(&y);
        let z_next: Vec<Complex64> = z
            .iter()
            .zip(&aty)
            .map(|(zi, gi)| soft_threshold(zi - tau * gi, tau * lambda))
            .collect();
        let az_next = system.apply(&z_next);
        for ((bar, new), old) in az_bar.iter_mut().zip(&az_next).zip(&az) {
            *bar = 2.0 * new - old;
        }
        z = z_next;
        az = az_next;

        let (p, r) = objective(&az, &z);
        if p < best.0 {
            best = (p, r, z.clone());
        }
        history.push(best.0);
        residuals.push(best.1);

        // dual value of y scaled into the feasible set |A^* y|_inf <= lambda
        let sup = aty.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let scale = 1.0 / (sup / lambda).max(1.0);
        let dual = -scale
            * y.iter()
                .zip(b)
                .map(|(yi, bi)| (yi.conj() * bi).re)
                .sum::<f64>();
        if best.0 - dual <= cfg.tol * (1.0 + best.0) {
            status = RecoveryStatus::Converged;
            break;
        }
    }

    let (p, _, z_best) = best;
    let entries: Vec<(MultiIndex, Complex64)> = columns.iter().cloned().zip(z_best).collect();
    let mut sol = SparseSolution::new(dim, entries, status);
    sol.index_set = IndexSet::from_indices(dim, columns.iter().cloned())?;
    sol.residual_history = residuals;
    sol.iterations = iterations;
    sol.objective = Some(p);
    sol.objective_history = history;
    Ok(sol)
}

/// Shrinks the modulus by `t`, keeping the phase.
fn soft_threshold(v: Complex64, t: f64) -> Complex64 {
    let r = v.norm();
    if r <= t {
        Complex64::default()
    } else {
        v * ((r - t) / r)
    }
}
