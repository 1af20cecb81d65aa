//! Fourier modes on the torus and the diffusion-reaction operator applied to them.
//!
//! `F_nu(x) = exp(2 pi i nu.x)` and the rescaled mode `Psi_nu = r_nu F_nu` with
//! `r_nu = 1 / (4 pi^2 |nu|^2 + rho / a0)`. For a diffusion coefficient with a
//! sparse Fourier expansion `a = a0 + sum_tau a_tau F_tau`, the operator image is
//! again a finite Fourier sum:
//!
//! ```text
//! L[Psi_nu] = r_nu ( sum_{tau in T+{0}} 4 pi^2 (tau.nu + |nu|^2) a_tau F_{tau+nu} + rho F_nu )
//! ```
//!
//! so no numerical differentiation is ever needed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::multiindex::MultiIndex;
use crate::problem::DiffusionCoefficient;

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

/// `nu.x` reduced modulo 1 into `[0,1)`.
#[inline]
pub fn reduced_phase(nu: &MultiIndex, x: &[f64]) -> f64 {
    debug_assert_eq!(nu.dim(), x.len());
    let s: f64 = nu
        .entries()
        .iter()
        .zip(x)
        .filter(|(&k, _)| k != 0)
        .map(|(&k, &xi)| k as f64 * xi)
        .sum();
    s - s.floor()
}

/// `exp(2 pi i nu.x)`.
#[inline]
pub fn fourier_eval(nu: &MultiIndex, x: &[f64]) -> Complex64 {
    Complex64::cis(2.0 * PI * reduced_phase(nu, x))
}

pub fn rescale_factor(nu: &MultiIndex, rho: f64, a0: f64) -> f64 {
    1.0 / (FOUR_PI_SQ * nu.norm_sq() + rho / a0)
}

/// Parameters of the rescaled system `Psi_nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rescaling {
    pub rho: f64,
    pub a0: f64,
}

impl Rescaling {
    pub fn factor(&self, nu: &MultiIndex) -> f64 {
        rescale_factor(nu, self.rho, self.a0)
    }
}

/// The operator image `L[Psi_nu]` of one mode, expanded as
/// `r_nu F_nu(x) (base + sum_tau weight_tau F_tau(x))`.
///
/// Terms are ordered like `a.modes()`, so callers can reuse precomputed
/// `F_tau(x)` values across modes.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub factor: f64,
    pub base: f64,
    pub weights: Vec<Complex64>,
}

impl ModeOperator {
    pub fn new(a: &DiffusionCoefficient, rho: f64, nu: &MultiIndex) -> Self {
        let nn = nu.norm_sq();
        let weights = a
            .modes()
            .map(|(tau, &amp)| amp * (FOUR_PI_SQ * (tau.dot(nu) + nn)))
            .collect();
        ModeOperator {
            factor: rescale_factor(nu, rho, a.a0()),
            base: FOUR_PI_SQ * nn * a.a0() + rho,
            weights,
        }
    }

    /// Evaluates given `F_nu(x)` and the values `F_tau(x)` of the coefficient's modes.
    #[inline]
    pub fn eval_with(&self, f_nu: Complex64, mode_values: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(self.base, 0.0);
        for (w, fv) in self.weights.iter().zip(mode_values) {
            acc += w * fv;
        }
        f_nu * acc * self.factor
    }
}

/// `[-div(a grad Psi_nu) + rho Psi_nu](x)` from the sparse Fourier form of `a`.
pub fn apply_operator_to_mode(
    a: &DiffusionCoefficient,
    rho: f64,
    nu: &MultiIndex,
    x: &[f64],
) -> Complex64 {
    let op = ModeOperator::new(a, rho, nu);
    let mode_values: Vec<Complex64> = a.modes().map(|(tau, _)| fourier_eval(tau, x)).collect();
    op.eval_with(fourier_eval(nu, x), &mode_values)
}

/// Product-rule evaluation `-grad a . grad Psi_nu - a lap Psi_nu + rho Psi_nu`
/// from pointwise callables for `a` and `grad a`. Works for any coefficient,
/// sparse or not.
pub fn apply_operator_callable<A, G>(
    a: A,
    grad_a: G,
    a0: f64,
    rho: f64,
    nu: &MultiIndex,
    x: &[f64],
) -> Complex64
where
    A: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let psi = fourier_eval(nu, x) * rescale_factor(nu, rho, a0);
    let grad = grad_a(x);
    // grad Psi = 2 pi i nu Psi, lap Psi = -4 pi^2 |nu|^2 Psi
    let grad_dot: f64 = grad
        .iter()
        .zip(nu.entries())
        .map(|(g, &k)| g * k as f64)
        .sum();
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    -(i2pi * grad_dot * psi) + a(x) * FOUR_PI_SQ * nu.norm_sq() * psi + rho * psi
}

/// `sum_nu c_nu Psi_nu(x)`, or `sum_nu c_nu F_nu(x)` when `rescaling` is `None`.
pub fn synthesize(
    coefficients: &BTreeMap<MultiIndex, Complex64>,
    rescaling: Option<Rescaling>,
    x: &[f64],
) -> Complex64 {
    coefficients
        .iter()
        .map(|(nu, c)| {
            let scale = rescaling.map_or(1.0, |r| r.factor(nu));
            c * fourier_eval(nu, x) * scale
        })
        .sum()
}
