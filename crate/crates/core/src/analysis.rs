//! Theory-side diagnostics: the Gram matrix of the operator images, Riesz
//! constants of the system `{L[Psi_nu]}`, the sample-complexity bound and
//! Sobolev norms of Fourier expansions.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{rescale_factor, Rescaling};
use crate::linalg::{self, CholeskyReport};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::problem::DiffusionCoefficient;
use crate::recovery::lambda_range;
use crate::{CfcError, Result};

/// Largest index set for the dense Gram and eigenvalue diagnostics.
pub const MAX_GRAM_SIZE: usize = 5000;

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RieszConstants {
    pub beta: f64,
    pub b_phi: f64,
    #[serde(rename = "B_phi")]
    pub big_b_phi: f64,
    #[serde(rename = "K_phi")]
    pub k_phi: f64,
    pub condition_satisfied: bool,
    /// Right-hand side minus left-hand side of the sufficient condition.
    pub margin: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(CfcError::InvalidArgument(format!("rho must be positive, got {rho}")))
    }
}

/// Fourier expansion of `L[Psi_nu]` as frequency -> coefficient.
fn operator_image(a: &DiffusionCoefficient, rho: f64, nu: &MultiIndex) -> Vec<(MultiIndex, Complex64)> {
    let r = rescale_factor(nu, rho, a.a0());
    let nn = nu.norm_sq();
    let mut out = Vec::with_capacity(a.support_size() + 1);
    let base = FOUR_PI_SQ * nn * a.a0() + rho;
    out.push((nu.clone(), Complex64::new(r * base, 0.0)));
    for (tau, amp) in a.modes() {
        let w = FOUR_PI_SQ * (tau.dot(nu) + nn);
        if w != 0.0 {
            out.push((tau.add(nu), amp * (r * w)));
        }
    }
    out
}

/// `G_{nu mu} = <L[Psi_mu], L[Psi_nu]>_{L^2}` on `set`, in canonical order.
pub fn gram_matrix(a: &DiffusionCoefficient, rho: f64, set: &IndexSet) -> Result<DMatrix<Complex64>> {
    check_rho(rho)?;
    if set.dim() != a.dim() {
        return Err(CfcError::DimensionMismatch {
            expected: a.dim(),
            got: set.dim(),
        });
    }
    let n = set.len();
    if n > MAX_GRAM_SIZE {
        return Err(CfcError::InvalidArgument(format!(
            "Gram diagnostics are limited to {MAX_GRAM_SIZE} indices, got {n}"
        )));
    }
    let images: Vec<Vec<(MultiIndex, Complex64)>> =
        set.iter().map(|nu| operator_image(a, rho, nu)).collect();
    let lookup: Vec<HashMap<&MultiIndex, Complex64>> = images
        .iter()
        .map(|img| img.iter().map(|(k, c)| (k, *c)).collect())
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    images[i]
                        .iter()
                        .filter_map(|(k, c)| lookup[j].get(k).map(|d| c.conj() * d))
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn riesz_constants(a: &DiffusionCoefficient, rho: f64) -> Result<RieszConstants> {
    check_rho(rho)?;
    let a0 = a.a0();
    let t = a.support_size() as f64;
    let h1_sq = a.h1_norm_sq();
    let beta = t.sqrt() * (h1_sq - a0 * a0).max(0.0).sqrt();
    let two_pi_sq = 2.0 * PI * PI;
    let lin = 2.0 * a0 + rho / two_pi_sq;
    let b_phi = a0 * a0 - lin * beta - beta * beta;
    let big_b_phi = h1_sq
        + rho * rho / (16.0 * PI.powi(4))
        + a0 * rho / two_pi_sq
        + lin * beta
        + beta * beta;
    let k_phi = a0 + beta + rho / FOUR_PI_SQ;
    let shift = a0 + rho / FOUR_PI_SQ;
    let rhs = (shift * shift + a0 * a0).sqrt() - shift;
    Ok(RieszConstants {
        beta,
        b_phi,
        big_b_phi,
        k_phi,
        condition_satisfied: beta < rhs,
        margin: rhs - beta,
    })
}

/// Sufficient number of collocation points
/// `c3 s log^2(c4 s) (min{log n + d, log(2n) log(2d)} + log(1/eps))`, with
/// `c3 = c0 (max{1,B}/b)^2 K^2` and `c4 = K^2 max{1,B}/b`. The universal
/// constant `c0` is unknown, so absolute values are only indicative.
pub fn sample_complexity(
    constants: &RieszConstants,
    s: usize,
    n: usize,
    d: usize,
    eps: f64,
    c0: f64,
) -> Result<u64> {
    if constants.b_phi <= 0.0 {
        return Err(CfcError::NonPositiveRieszBound(constants.b_phi));
    }
    if s == 0 || n == 0 || d == 0 {
        return Err(CfcError::InvalidArgument("s, n and d must be positive".into()));
    }
    if !(eps > 0.0 && eps < 1.0) || !(c0 > 0.0) {
        return Err(CfcError::InvalidArgument(
            "need 0 < eps < 1 and c0 > 0".into(),
        ));
    }
    let ratio = constants.big_b_phi.max(1.0) / constants.b_phi;
    let k2 = constants.k_phi * constants.k_phi;
    let c3 = c0 * ratio * ratio * k2;
    let c4 = k2 * ratio;
    let (s, n, d) = (s as f64, n as f64, d as f64);
    let log_term = (n.ln() + d).min((2.0 * n).ln() * (2.0 * d).ln());
    let m = c3 * s * (c4 * s).ln().powi(2) * (log_term + (1.0 / eps).ln());
    Ok(m.ceil() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SobolevNorms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub triple: f64,
}

/// Norms of `sum c_nu F_nu`. With `rescaling`, the coefficients refer to the
/// rescaled modes and are converted first.
pub fn sobolev_norms(
    coefficients: &BTreeMap<MultiIndex, Complex64>,
    rescaling: Option<Rescaling>,
) -> SobolevNorms {
    let (mut l2, mut h1, mut h2, mut triple) = (0.0, 0.0, 0.0, 0.0);
    for (nu, c) in coefficients {
        let scale = rescaling.map_or(1.0, |r| r.factor(nu));
        let c2 = (c * scale).norm_sqr();
        let k = FOUR_PI_SQ * nu.norm_sq();
        l2 += c2;
        h1 += (1.0 + k) * c2;
        h2 += (1.0 + k + k * k) * c2;
        triple += (1.0 + k * k) * c2;
    }
    SobolevNorms {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
        h2: h2.sqrt(),
        triple: triple.sqrt(),
    }
}

/// `[min_i (G_ii - R_i), max_i (G_ii + R_i)]` with `R_i` the off-diagonal row sums.
pub fn gershgorin_interval(g: &DMatrix<Complex64>) -> (f64, f64) {
    let n = g.nrows();
    (0..n)
        .map(|i| {
            let radius: f64 = (0..n).filter(|&j| j != i).map(|j| g[(i, j)].norm()).sum();
            (g[(i, i)].re - radius, g[(i, i)].re + radius)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (lo, hi)| {
            (acc.0.min(lo), acc.1.max(hi))
        })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(g: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if g.nrows() != g.ncols() {
        return Err(CfcError::InvalidArgument("matrix is not square".into()));
    }
    if g.nrows() > MAX_GRAM_SIZE {
        return Err(CfcError::InvalidArgument(format!(
            "eigenvalue diagnostics are limited to {MAX_GRAM_SIZE} rows"
        )));
    }
    let mut ev: Vec<f64> = g.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Pivoted Cholesky check of positive semidefiniteness with relative tolerance `tol`.
pub fn psd_check(g: &DMatrix<Complex64>, tol: f64) -> CholeskyReport {
    linalg::pivoted_cholesky(g, tol)
}

/// `max |L[Psi_nu](x)|` over the given points.
pub fn mode_sup_norm(a: &DiffusionCoefficient, rho: f64, nu: &MultiIndex, points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|x| crate::basis::apply_operator_to_mode(a, rho, nu, x).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub s: usize,
    pub eps: f64,
    pub m: u64,
}

/// Everything the coefficient analyzer reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub dimension: usize,
    pub rho: f64,
    pub a0: f64,
    pub support_size: usize,
    pub h1_norm: f64,
    pub constants: RieszConstants,
    /// `(s, upper end)` of the admissible SR-LASSO parameter range per sparsity.
    pub lambda_upper: Vec<(usize, f64)>,
    pub sample_complexity: Vec<ComplexityRow>,
    pub n: usize,
    pub c0: f64,
}

impl AnalysisReport {
    pub fn new(
        a: &DiffusionCoefficient,
        rho: f64,
        n: usize,
        sparsities: &[usize],
        eps_values: &[f64],
        c0: f64,
    ) -> Result<Self> {
        let constants = riesz_constants(a, rho)?;
        let mut lambda_upper = Vec::new();
        let mut table = Vec::new();
        if constants.b_phi > 0.0 {
            for &s in sparsities {
                lambda_upper.push((s, lambda_range(&constants, s)?.1));
                for &eps in eps_values {
                    let m = sample_complexity(&constants, s, n, a.dim(), eps, c0)?;
                    table.push(ComplexityRow { s, eps, m });
                }
            }
        }
        Ok(AnalysisReport {
            dimension: a.dim(),
            rho,
            a0: a.a0(),
            support_size: a.support_size(),
            h1_norm: a.h1_norm_sq().sqrt(),
            constants,
            lambda_upper,
            sample_complexity: table,
            n,
            c0,
        })
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = &self.constants;
        writeln!(f, "dimension          {}", self.dimension)?;
        writeln!(f, "rho                {}", self.rho)?;
        writeln!(f, "a0                 {}", self.a0)?;
        writeln!(f, "|T|                {}", self.support_size)?;
        writeln!(f, "|a|_H1             {:.12}", self.h1_norm)?;
        writeln!(f, "beta               {:.12}", k.beta)?;
        writeln!(f, "b_Phi              {:.12}", k.b_phi)?;
        writeln!(f, "B_Phi              {:.12}", k.big_b_phi)?;
        writeln!(f, "K_Phi              {:.12}", k.k_phi)?;
        let verdict = if k.condition_satisfied { "satisfied" } else { "not satisfied" };
        writeln!(f, "condition          {verdict}")?;
        writeln!(f, "margin             {:.12}", k.margin)?;
        if self.lambda_upper.is_empty() {
            writeln!(f, "lambda range       undefined (b_Phi <= 0)")?;
            return Ok(());
        }
        for (s, up) in &self.lambda_upper {
            writeln!(f, "lambda range s={s:<4} (0, {up:.6e}]")?;
        }
        writeln!(f, "sample complexity (n = {}, c0 = {}):", self.n, self.c0)?;
        writeln!(f, "  {:>6} {:>8} {:>14}", "s", "eps", "m")?;
        for row in &self.sample_complexity {
            writeln!(f, "  {:>6} {:>8} {:>14}", row.s, row.eps, row.m)?;
        }
        Ok(())
    }
}
