//! Monte Carlo error measurement and geometric statistics over repeated runs.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{synthesize, Rescaling};
use crate::problem::ExactSolution;
use crate::recovery::SparseSolution;
use crate::rng;
use crate::{CfcError, Result};

pub const DEFAULT_EVAL_POINTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub relative_l2: f64,
    /// Number of Monte Carlo points.
    #[serde(rename = "M")]
    pub points: usize,
    pub seed: u64,
    /// Delta-method standard error of `relative_l2`.
    pub std_error: f64,
    pub runs: Option<Vec<f64>>,
}

/// Uniform points for error estimation, drawn from the evaluation stream so
/// they never coincide with collocation points of the same seed.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationSet {
    seed: u64,
    points: Vec<Vec<f64>>,
}

impl EvaluationSet {
    pub fn new(count: usize, dim: usize, seed: u64) -> Result<Self> {
        if count == 0 || dim == 0 {
            return Err(CfcError::InvalidArgument(
                "need at least one evaluation point in dimension >= 1".into(),
            ));
        }
        Ok(EvaluationSet {
            seed,
            points: rng::uniform_points(count, dim, seed, rng::EVALUATION_STREAM),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// `sqrt(sum |u - v|^2 / sum |u|^2)` over the set.
    pub fn relative_l2<E, A>(&self, exact: E, approx: A) -> Result<ErrorReport>
    where
        E: Fn(&[f64]) -> f64 + Sync,
        A: Fn(&[f64]) -> Complex64 + Sync,
    {
        let pairs: Vec<(f64, f64)> = self
            .points
            .par_iter()
            .map(|x| {
                let u = exact(x);
                ((Complex64::new(u, 0.0) - approx(x)).norm_sqr(), u * u)
            })
            .collect();
        let count = pairs.len() as f64;
        let num: f64 = pairs.iter().map(|p| p.0).sum();
        let den: f64 = pairs.iter().map(|p| p.1).sum();
        if den == 0.0 {
            return Err(CfcError::ZeroDenominator);
        }
        let q = num / den;
        let std_error = if q > 0.0 && pairs.len() > 1 {
            let (nm, dm) = (num / count, den / count);
            let var: f64 = pairs
                .iter()
                .map(|(n, d)| (n - nm - q * (d - dm)).powi(2))
                .sum::<f64>()
                / (count - 1.0);
            let se_q = (var / count).sqrt() / dm;
            se_q / (2.0 * q.sqrt())
        } else {
            0.0
        };
        Ok(ErrorReport {
            relative_l2: q.sqrt(),
            points: self.points.len(),
            seed: self.seed,
            std_error,
            runs: None,
        })
    }

    pub fn solution_error(
        &self,
        exact: &dyn ExactSolution,
        solution: &SparseSolution,
        rescaling: Option<Rescaling>,
    ) -> Result<ErrorReport> {
        if exact.dim() != self.points[0].len() {
            return Err(CfcError::DimensionMismatch {
                expected: self.points[0].len(),
                got: exact.dim(),
            });
        }
        self.relative_l2(
            |x| exact.value(x),
            |x| synthesize(&solution.coefficients, rescaling, x),
        )
    }
}

/// Relative L² error of `approx` against `exact` on `m` seeded uniform points.
pub fn relative_l2_error<A>(exact: &dyn ExactSolution, approx: A, m: usize, seed: u64) -> Result<ErrorReport>
where
    A: Fn(&[f64]) -> Complex64 + Sync,
{
    EvaluationSet::new(m, exact.dim(), seed)?.relative_l2(|x| exact.value(x), approx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometricStats {
    pub geo_mean: f64,
    /// `exp` of the sample standard deviation (n - 1 denominator) of the logs.
    pub geo_std: f64,
}

pub fn geometric_stats(errors: &[f64]) -> Result<GeometricStats> {
    if errors.is_empty() {
        return Err(CfcError::InvalidArgument("no errors to aggregate".into()));
    }
    if let Some(bad) = errors.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
        return Err(CfcError::InvalidArgument(format!(
            "geometric statistics need positive errors, got {bad}"
        )));
    }
    let logs: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let geo_std = if logs.len() == 1 {
        1.0
    } else {
        (logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0))
            .sqrt()
            .exp()
    };
    Ok(GeometricStats {
        geo_mean: mean.exp(),
        geo_std,
    })
}
