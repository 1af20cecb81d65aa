//! Problem data: diffusion coefficient, reaction constant, forcing and exact
//! solutions with hand-derived derivatives.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use crate::basis::{fourier_eval, Rescaling};
use crate::multiindex::MultiIndex;
use crate::rng;
use crate::{CfcError, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Default reaction constant.
pub const DEFAULT_RHO: f64 = 0.5;

/// `a(x) = a0 + sum_{tau in T} a_tau F_tau(x)` with `T` finite and not containing 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionCoefficient {
    dim: usize,
    a0: f64,
    modes: BTreeMap<MultiIndex, Complex64>,
}

impl DiffusionCoefficient {
    /// Validates positivity of the mean, Hermitian symmetry of the amplitudes and
    /// (spot-checked) ellipticity.
    pub fn new(dim: usize, a0: f64, modes: BTreeMap<MultiIndex, Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(CfcError::InvalidArgument("dimension must be positive".into()));
        }
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(CfcError::InvalidArgument(format!("a0 must be positive, got {a0}")));
        }
        for (tau, amp) in &modes {
            if tau.dim() != dim {
                return Err(CfcError::DimensionMismatch {
                    expected: dim,
                    got: tau.dim(),
                });
            }
            if tau.is_zero() {
                return Err(CfcError::InvalidArgument(
                    "the zero mode is given by a0, not by the mode list".into(),
                ));
            }
            let mirror = modes.get(&tau.neg()).copied().unwrap_or_default();
            if (mirror - amp.conj()).norm() > 1e-12 * (1.0 + amp.norm()) {
                return Err(CfcError::InvalidArgument(format!(
                    "amplitudes are not Hermitian at {tau}: a(x) would not be real"
                )));
            }
        }
        let coef = DiffusionCoefficient { dim, a0, modes };
        let total: f64 = coef.modes.values().map(|a| a.norm()).sum();
        if total >= a0 {
            let pts = rng::uniform_points(4096, dim, 0x0a11_ce, rng::AUXILIARY_STREAM);
            if let Some(x) = pts.iter().find(|x| coef.value(x) <= 0.0) {
                return Err(CfcError::InvalidArgument(format!(
                    "diffusion coefficient is not elliptic: a({x:?}) = {}",
                    coef.value(x)
                )));
            }
        }
        Ok(coef)
    }

    pub fn constant(dim: usize, a0: f64) -> Self {
        DiffusionCoefficient::new(dim, a0, BTreeMap::new()).expect("positive constant")
    }

    /// `1 + 0.25 sin(2 pi x1) sin(2 pi x2)`; the amplitudes follow from
    /// `sin A sin B = -(F_(1,1) - F_(1,-1) - F_(-1,1) + F_(-1,-1)) / 4`.
    pub fn paper(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(CfcError::InvalidArgument(
                "the default coefficient needs d >= 2".into(),
            ));
        }
        let mut modes = BTreeMap::new();
        for (s1, s2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let mut e = vec![0; dim];
            e[0] = s1;
            e[1] = s2;
            let amp = -0.0625 * (s1 * s2) as f64;
            modes.insert(MultiIndex::new(e), Complex64::new(amp, 0.0));
        }
        DiffusionCoefficient::new(dim, 1.0, modes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Nonzero modes `(tau, a_tau)` in canonical order.
    pub fn modes(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.modes.iter()
    }

    /// `|T|`.
    pub fn support_size(&self) -> usize {
        self.modes.len()
    }

    /// Amplitude of mode `tau` (including `a0` for `tau = 0`).
    pub fn amplitude(&self, tau: &MultiIndex) -> Complex64 {
        if tau.is_zero() {
            Complex64::new(self.a0, 0.0)
        } else {
            self.modes.get(tau).copied().unwrap_or_default()
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let osc: Complex64 = self.modes.iter().map(|(t, a)| a * fourier_eval(t, x)).sum();
        self.a0 + osc.re
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (tau, amp) in &self.modes {
            // d/dx_k a_tau F_tau = 2 pi i tau_k a_tau F_tau
            let w = amp * fourier_eval(tau, x) * Complex64::new(0.0, TWO_PI);
            for (gk, &tk) in g.iter_mut().zip(tau.entries()) {
                *gk += (w * tk as f64).re;
            }
        }
        g
    }

    /// `||a||_{H^1}^2 = a0^2 + sum_T (1 + 4 pi^2 |tau|^2) |a_tau|^2`.
    pub fn h1_norm_sq(&self) -> f64 {
        self.a0 * self.a0 + self.oscillation_h1_norm_sq()
    }

    /// `||a - a0||_{H^1}^2`.
    pub fn oscillation_h1_norm_sq(&self) -> f64 {
        self.modes
            .iter()
            .map(|(t, a)| (1.0 + 4.0 * PI * PI * t.norm_sq()) * a.norm_sqr())
            .sum()
    }

    /// Smallest value of `a` over the given points.
    pub fn min_over(&self, points: &[Vec<f64>]) -> f64 {
        points.iter().map(|x| self.value(x)).fold(f64::INFINITY, f64::min)
    }
}

/// A closed-form solution used to manufacture the forcing term.
pub trait ExactSolution: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn laplacian(&self, x: &[f64]) -> f64;
    fn label(&self) -> String;
}

/// `sin(4 pi x1) sin(2 pi x2)`.
#[derive(Clone, Debug)]
pub struct SineProduct {
    dim: usize,
}

impl ExactSolution for SineProduct {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (2.0 * TWO_PI * x[0]).sin() * (TWO_PI * x[1]).sin()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (a, b) = (2.0 * TWO_PI * x[0], TWO_PI * x[1]);
        let mut g = vec![0.0; self.dim];
        g[0] = 2.0 * TWO_PI * a.cos() * b.sin();
        g[1] = TWO_PI * a.sin() * b.cos();
        g
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        -20.0 * PI * PI * self.value(x)
    }

    fn label(&self) -> String {
        "sin(4 pi x1) sin(2 pi x2)".into()
    }
}

/// `exp(sum_k w_k sin(2 pi x_k))`.
#[derive(Clone, Debug)]
pub struct ExpSineSum {
    weights: Vec<f64>,
    label: String,
}

impl ExpSineSum {
    pub fn new(weights: Vec<f64>, label: impl Into<String>) -> Self {
        ExpSineSum {
            weights,
            label: label.into(),
        }
    }
}

impl ExactSolution for ExpSineSum {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x)
            .map(|(w, xk)| w * (TWO_PI * xk).sin())
            .sum::<f64>()
            .exp()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let u = self.value(x);
        self.weights
            .iter()
            .zip(x)
            .map(|(w, xk)| u * w * TWO_PI * (TWO_PI * xk).cos())
            .collect()
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        // d2/dxk2 u = u [ (2 pi w cos)^2 - 4 pi^2 w sin ]
        let u = self.value(x);
        self.weights
            .iter()
            .zip(x)
            .filter(|(w, _)| **w != 0.0)
            .map(|(w, xk)| {
                let t = TWO_PI * xk;
                let c = TWO_PI * w * t.cos();
                u * (c * c - TWO_PI * TWO_PI * w * t.sin())
            })
            .sum()
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// A real trigonometric polynomial given by Hermitian Fourier coefficients.
#[derive(Clone, Debug)]
pub struct TrigPolynomial {
    dim: usize,
    coefficients: BTreeMap<MultiIndex, Complex64>,
}

impl TrigPolynomial {
    pub fn new(dim: usize, coefficients: BTreeMap<MultiIndex, Complex64>) -> Result<Self> {
        for (nu, c) in &coefficients {
            if nu.dim() != dim {
                return Err(CfcError::DimensionMismatch {
                    expected: dim,
                    got: nu.dim(),
                });
            }
            let mirror = coefficients.get(&nu.neg()).copied().unwrap_or_default();
            if (mirror - c.conj()).norm() > 1e-12 * (1.0 + c.norm()) {
                return Err(CfcError::InvalidArgument(format!(
                    "solution coefficients are not Hermitian at {nu}"
                )));
            }
        }
        Ok(TrigPolynomial { dim, coefficients })
    }

    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.coefficients
    }
}

impl ExactSolution for TrigPolynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|(nu, c)| (c * fourier_eval(nu, x)).re)
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (nu, c) in &self.coefficients {
            let w = c * fourier_eval(nu, x) * Complex64::new(0.0, TWO_PI);
            for (gk, &k) in g.iter_mut().zip(nu.entries()) {
                *gk += (w * k as f64).re;
            }
        }
        g
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|(nu, c)| -(TWO_PI * TWO_PI) * nu.norm_sq() * (c * fourier_eval(nu, x)).re)
            .sum()
    }

    fn label(&self) -> String {
        format!("trigonometric polynomial ({} terms)", self.coefficients.len())
    }
}

/// Built-in exact solutions: 1 = `sin(4 pi x1) sin(2 pi x2)`,
/// 2 = `exp(sin(2 pi x1) + sin(2 pi x2))`, 3 = `exp(sum_k sin(2 pi x_k) / k^2)`.
pub fn example_solution(k: u8, d: usize) -> Result<Arc<dyn ExactSolution>> {
    if d < 2 {
        return Err(CfcError::InvalidArgument("examples need d >= 2".into()));
    }
    match k {
        1 => Ok(Arc::new(SineProduct { dim: d })),
        2 => {
            let mut w = vec![0.0; d];
            w[0] = 1.0;
            w[1] = 1.0;
            Ok(Arc::new(ExpSineSum::new(w, "exp(sin(2 pi x1) + sin(2 pi x2))")))
        }
        3 => {
            let w = (1..=d).map(|k| 1.0 / (k * k) as f64).collect();
            Ok(Arc::new(ExpSineSum::new(w, "exp(sum_k sin(2 pi x_k) / k^2)")))
        }
        _ => Err(CfcError::InvalidArgument(format!(
            "unknown example {k}; expected 1, 2 or 3"
        ))),
    }
}

/// Fourier coefficients of the first example, supported on `(±2, ±1, 0, ...)`.
/// Raw coefficients when `rescaling` is `None`, otherwise the coefficients with
/// respect to the rescaled system (divided by `r_nu`).
pub fn example1_coefficients(
    d: usize,
    rescaling: Option<Rescaling>,
) -> BTreeMap<MultiIndex, Complex64> {
    // sin(4 pi x1) sin(2 pi x2) = -(F_(2,1) - F_(2,-1) - F_(-2,1) + F_(-2,-1)) / 4
    let mut out = BTreeMap::new();
    for (s1, s2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let mut e = vec![0; d];
        e[0] = 2 * s1;
        e[1] = s2;
        let nu = MultiIndex::new(e);
        let raw = -0.25 * (s1 * s2) as f64;
        let scale = rescaling.map_or(1.0, |r| 1.0 / r.factor(&nu));
        out.insert(nu, Complex64::new(raw * scale, 0.0));
    }
    out
}

pub type ForcingFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `f = -grad a . grad u - a lap u + rho u`, with `grad a` taken from the sparse
/// Fourier form of `a`.
pub fn manufactured_forcing(
    a: &DiffusionCoefficient,
    rho: f64,
    exact: Arc<dyn ExactSolution>,
) -> ForcingFn {
    let a = a.clone();
    Arc::new(move |x: &[f64]| {
        let ga = a.gradient(x);
        let gu = exact.gradient(x);
        let adv: f64 = ga.iter().zip(&gu).map(|(p, q)| p * q).sum();
        -adv - a.value(x) * exact.laplacian(x) + rho * exact.value(x)
    })
}

/// `-div(a grad u) + rho u = f` on the torus.
#[derive(Clone)]
pub struct ProblemSpec {
    pub a: DiffusionCoefficient,
    pub rho: f64,
    pub forcing: ForcingFn,
    pub exact: Option<Arc<dyn ExactSolution>>,
    /// Short name used in reports ("1", "2", "3", "custom").
    pub label: String,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("dimension", &self.dimension())
            .field("rho", &self.rho)
            .field("a", &self.a)
            .field("exact", &self.exact.as_ref().map(|e| e.label()))
            .field("label", &self.label)
            .finish()
    }
}

impl ProblemSpec {
    /// A problem whose forcing is manufactured from `exact`.
    pub fn manufactured(
        a: DiffusionCoefficient,
        rho: f64,
        exact: Arc<dyn ExactSolution>,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_rho(rho)?;
        if exact.dim() != a.dim() {
            return Err(CfcError::DimensionMismatch {
                expected: a.dim(),
                got: exact.dim(),
            });
        }
        let forcing = manufactured_forcing(&a, rho, exact.clone());
        Ok(ProblemSpec {
            a,
            rho,
            forcing,
            exact: Some(exact),
            label: label.into(),
        })
    }

    pub fn with_forcing(
        a: DiffusionCoefficient,
        rho: f64,
        forcing: ForcingFn,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_rho(rho)?;
        Ok(ProblemSpec {
            a,
            rho,
            forcing,
            exact: None,
            label: label.into(),
        })
    }

    /// Paper coefficient, the given built-in example and reaction constant.
    pub fn example(k: u8, d: usize, rho: f64) -> Result<Self> {
        let exact = example_solution(k, d)?;
        ProblemSpec::manufactured(DiffusionCoefficient::paper(d)?, rho, exact, k.to_string())
    }

    pub fn dimension(&self) -> usize {
        self.a.dim()
    }

    pub fn rescaling(&self) -> Rescaling {
        Rescaling {
            rho: self.rho,
            a0: self.a.a0(),
        }
    }

    pub fn forcing(&self, x: &[f64]) -> f64 {
        (self.forcing)(x)
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(CfcError::InvalidArgument(format!("rho must be positive, got {rho}")))
    }
}

/// One Fourier amplitude in a configuration file.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub index: Vec<i32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionPreset {
    /// `1 + 0.25 sin(2 pi x1) sin(2 pi x2)`.
    Paper,
    /// `a = 1`.
    Constant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExampleChoice {
    Builtin(u8),
    Custom,
}

impl<'de> Deserialize<'de> for ExampleChoice {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(i64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(k @ 1..=3) => Ok(ExampleChoice::Builtin(k as u8)),
            Raw::Text(s) if s == "custom" => Ok(ExampleChoice::Custom),
            Raw::Text(s) => match s.parse::<u8>() {
                Ok(k @ 1..=3) => Ok(ExampleChoice::Builtin(k)),
                _ => Err(serde::de::Error::custom(format!(
                    "example must be 1, 2, 3 or \"custom\", got \"{s}\""
                ))),
            },
            Raw::Num(k) => Err(serde::de::Error::custom(format!(
                "example must be 1, 2, 3 or \"custom\", got {k}"
            ))),
        }
    }
}

impl fmt::Display for ExampleChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleChoice::Builtin(k) => write!(f, "{k}"),
            ExampleChoice::Custom => write!(f, "custom"),
        }
    }
}

/// The `[problem]` table of a configuration file.
///
/// The diffusion coefficient is either explicit (`a0` plus `modes`) or a named
/// `diffusion` preset; a custom example reads its exact solution from
/// `solution_modes` (Hermitian Fourier coefficients).
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dimension: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
    pub example: Option<ExampleChoice>,
    pub diffusion: Option<DiffusionPreset>,
    pub a0: Option<f64>,
    #[serde(default)]
    pub modes: Vec<ModeEntry>,
    #[serde(default)]
    pub solution_modes: Vec<ModeEntry>,
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}

fn mode_map(dim: usize, entries: &[ModeEntry]) -> Result<BTreeMap<MultiIndex, Complex64>> {
    let mut out = BTreeMap::new();
    for e in entries {
        if e.index.len() != dim {
            return Err(CfcError::DimensionMismatch {
                expected: dim,
                got: e.index.len(),
            });
        }
        let nu = MultiIndex::new(e.index.clone());
        if out.insert(nu.clone(), Complex64::new(e.re, e.im)).is_some() {
            return Err(CfcError::Parse(format!("mode {nu} listed twice")));
        }
    }
    Ok(out)
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CfcError::Parse(e.to_string()))
    }

    pub fn diffusion_coefficient(&self) -> Result<DiffusionCoefficient> {
        if self.dimension == 0 {
            return Err(CfcError::InvalidArgument("dimension must be positive".into()));
        }
        match (self.a0, self.diffusion) {
            (Some(a0), None) => {
                DiffusionCoefficient::new(self.dimension, a0, mode_map(self.dimension, &self.modes)?)
            }
            (None, Some(_)) if !self.modes.is_empty() => Err(CfcError::Parse(
                "`modes` requires an explicit `a0`".into(),
            )),
            (None, Some(DiffusionPreset::Paper)) => DiffusionCoefficient::paper(self.dimension),
            (None, Some(DiffusionPreset::Constant)) => {
                Ok(DiffusionCoefficient::constant(self.dimension, 1.0))
            }
            (Some(_), Some(_)) => Err(CfcError::Parse(
                "give either `a0` (with `modes`) or `diffusion`, not both".into(),
            )),
            (None, None) => Err(CfcError::Parse("missing key `a0`".into())),
        }
    }

    pub fn build(&self) -> Result<ProblemSpec> {
        let a = self.diffusion_coefficient()?;
        let choice = self
            .example
            .clone()
            .ok_or_else(|| CfcError::Parse("missing key `example`".into()))?;
        let exact: Arc<dyn ExactSolution> = match &choice {
            ExampleChoice::Builtin(k) => example_solution(*k, self.dimension)?,
            ExampleChoice::Custom => {
                if self.solution_modes.is_empty() {
                    return Err(CfcError::Parse(
                        "example = \"custom\" needs `solution_modes`".into(),
                    ));
                }
                let coeffs = mode_map(self.dimension, &self.solution_modes)?;
                Arc::new(TrigPolynomial::new(self.dimension, coeffs)?)
            }
        };
        ProblemSpec::manufactured(a, self.rho, exact, choice.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + b.abs())
    }

    #[test]
    fn paper_coefficient_values() {
        let a = DiffusionCoefficient::paper(4).unwrap();
        assert_eq!(a.support_size(), 4);
        assert!(a.modes().all(|(_, amp)| (amp.norm() - 1.0 / 16.0).abs() < 1e-15));
        assert!((a.value(&[0.0; 4]) - 1.0).abs() < 1e-15);
        assert!((a.value(&[0.25, 0.25, 0.7, 0.1]) - 1.25).abs() < 1e-14);
        assert!(DiffusionCoefficient::paper(1).is_err());
        let pts = rng::uniform_points(2000, 4, 3, rng::AUXILIARY_STREAM);
        assert!(a.min_over(&pts) >= 0.75 - 1e-12);
    }

    #[test]
    fn coefficient_validation() {
        let mut m = BTreeMap::new();
        m.insert(MultiIndex::from([1, 0]), Complex64::new(0.1, 0.0));
        // missing the mirrored mode
        assert!(DiffusionCoefficient::new(2, 1.0, m.clone()).is_err());
        m.insert(MultiIndex::from([-1, 0]), Complex64::new(0.1, 0.0));
        assert!(DiffusionCoefficient::new(2, 1.0, m.clone()).is_ok());
        assert!(DiffusionCoefficient::new(2, -1.0, BTreeMap::new()).is_err());
        // a = 1 + 2 cos(2 pi x1) is not elliptic
        let mut big = BTreeMap::new();
        big.insert(MultiIndex::from([1, 0]), Complex64::new(1.0, 0.0));
        big.insert(MultiIndex::from([-1, 0]), Complex64::new(1.0, 0.0));
        assert!(DiffusionCoefficient::new(2, 1.0, big).is_err());
    }

    #[test]
    fn example_solution_values() {
        let u1 = example_solution(1, 6).unwrap();
        assert!((u1.value(&[0.125, 0.25, 0.0, 0.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        let u2 = example_solution(2, 6).unwrap();
        assert_eq!(u2.value(&[0.0; 6]), 1.0);
        let u3 = example_solution(3, 6).unwrap();
        let bound = (PI * PI / 6.0).exp();
        for x in rng::uniform_points(500, 6, 9, rng::AUXILIARY_STREAM) {
            assert!(u3.value(&x) <= bound);
        }
        assert!(example_solution(4, 6).is_err());
        assert!(example_solution(1, 1).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for k in 1..=3 {
            let u = example_solution(k, 4).unwrap();
            for x in rng::uniform_points(20, 4, 21, rng::AUXILIARY_STREAM) {
                let g = u.gradient(&x);
                let mut lap_fd = 0.0;
                for j in 0..4 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let (up, um, u0) = (u.value(&xp), u.value(&xm), u.value(&x));
                    let gfd = (up - um) / (2.0 * h);
                    assert!(rel(g[j], gfd) < 1e-5, "example {k} grad {j}: {} vs {gfd}", g[j]);
                    lap_fd += (up - 2.0 * u0 + um) / (h * h);
                }
                let lap = u.laplacian(&x);
                assert!(
                    (lap - lap_fd).abs() < 1e-5 * (1.0 + lap.abs()) * 10.0,
                    "example {k}: {lap} vs {lap_fd}"
                );
            }
        }
    }

    #[test]
    fn manufactured_forcing_examples() {
        let rho = 0.5;
        let a = DiffusionCoefficient::constant(2, 1.0);
        let mut c = BTreeMap::new();
        c.insert(MultiIndex::from([1, 0]), Complex64::new(0.0, -0.5));
        c.insert(MultiIndex::from([-1, 0]), Complex64::new(0.0, 0.5));
        let sine: Arc<dyn ExactSolution> = Arc::new(TrigPolynomial::new(2, c).unwrap());
        let f = manufactured_forcing(&a, rho, sine);
        for x in [[0.1, 0.3], [0.7, 0.2]] {
            let expected = (4.0 * PI * PI + 0.5) * (TWO_PI * x[0]).sin();
            assert!(rel(f(&x), expected) < 1e-13);
        }

        let zero: Arc<dyn ExactSolution> =
            Arc::new(TrigPolynomial::new(2, BTreeMap::new()).unwrap());
        let f0 = manufactured_forcing(&DiffusionCoefficient::paper(2).unwrap(), rho, zero);
        assert_eq!(f0(&[0.3, 0.4]), 0.0);
    }

    #[test]
    fn example1_coefficients_synthesize_the_solution() {
        let coeffs = example1_coefficients(3, None);
        assert_eq!(coeffs.len(), 4);
        let u1 = example_solution(1, 3).unwrap();
        for x in rng::uniform_points(10, 3, 5, rng::AUXILIARY_STREAM) {
            let v = crate::basis::synthesize(&coeffs, None, &x);
            assert!((v.re - u1.value(&x)).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn config_parsing() {
        let cfg = ProblemConfig::from_toml(
            r#"
            dimension = 2
            rho = 0.5
            example = 2
            a0 = 1.0
            modes = [
              { index = [1, 1], re = -0.0625 },
              { index = [-1, -1], re = -0.0625 },
              { index = [1, -1], re = 0.0625 },
              { index = [-1, 1], re = 0.0625, im = 0.0 },
            ]
            "#,
        )
        .unwrap();
        assert_eq!(
            cfg.diffusion_coefficient().unwrap(),
            DiffusionCoefficient::paper(2).unwrap()
        );
        assert_eq!(cfg.build().unwrap().label, "2");

        let missing = ProblemConfig::from_toml("dimension = 2\nexample = 1\n").unwrap();
        let err = missing.diffusion_coefficient().unwrap_err();
        assert!(err.to_string().contains("a0"));

        assert!(ProblemConfig::from_toml("dimension = 2\nexample = 7\n").is_err());
        let custom = ProblemConfig::from_toml(
            r#"
            dimension = 2
            example = "custom"
            diffusion = "constant"
            solution_modes = [ { index = [0, 1], re = 0.5 }, { index = [0, -1], re = 0.5 } ]
            "#,
        )
        .unwrap();
        let spec = custom.build().unwrap();
        let u = spec.exact.as_ref().unwrap();
        assert!((u.value(&[0.0, 0.25]) - (PI / 2.0).cos()).abs() < 1e-15);
    }
}
