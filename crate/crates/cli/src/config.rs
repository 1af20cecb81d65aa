//! Configuration files: a `[problem]` table, plus `[experiment]` for `run` and
//! an optional `[analysis]` table for `analyze`. See `configs/schema.toml`.

use std::fmt;
use std::path::Path;

use cfc::analysis::riesz_constants;
use cfc::evaluation::DEFAULT_EVAL_POINTS;
use cfc::multiindex::{enumerate_hyperbolic_cross_capped, hyperbolic_cross_bound, DEFAULT_CARDINALITY_CAP};
use cfc::problem::{DiffusionCoefficient, ProblemConfig, ProblemSpec};
use cfc::recovery::{lambda_range, SrLassoConfig};
use cfc::CfcError;
use serde::Deserialize;

use crate::Failure;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: ProblemConfig,
    pub experiment: Option<ExperimentSection>,
    pub analysis: Option<AnalysisSection>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Omp,
    LowerOmp,
    SrLasso,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Omp => "omp",
            Method::LowerOmp => "lower_omp",
            Method::SrLasso => "sr_lasso",
        })
    }
}

/// `"half"` (m / 2), `"none"`, or an explicit number of indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxSupport {
    Half,
    Unlimited,
    Fixed(usize),
}

impl MaxSupport {
    pub fn resolve(self, m: usize) -> Option<usize> {
        match self {
            MaxSupport::Half => Some(m / 2),
            MaxSupport::Unlimited => None,
            MaxSupport::Fixed(n) => Some(n),
        }
    }
}

/// `"auto"` or a nonnegative number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lambda {
    Auto,
    Value(f64),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberOrWord {
    Int(i64),
    Float(f64),
    Word(String),
}

impl<'de> Deserialize<'de> for MaxSupport {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        match NumberOrWord::deserialize(de)? {
            NumberOrWord::Int(n) if n > 0 => Ok(MaxSupport::Fixed(n as usize)),
            NumberOrWord::Word(w) if w == "half" => Ok(MaxSupport::Half),
            NumberOrWord::Word(w) if w == "none" => Ok(MaxSupport::Unlimited),
            _ => Err(serde::de::Error::custom(
                "max_support must be \"half\", \"none\" or a positive integer",
            )),
        }
    }
}

impl<'de> Deserialize<'de> for Lambda {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        match NumberOrWord::deserialize(de)? {
            NumberOrWord::Int(n) => Ok(Lambda::Value(n as f64)),
            NumberOrWord::Float(x) => Ok(Lambda::Value(x)),
            NumberOrWord::Word(w) if w == "auto" => Ok(Lambda::Auto),
            NumberOrWord::Word(w) => Err(serde::de::Error::custom(format!(
                "lambda must be \"auto\" or a number, got \"{w}\""
            ))),
        }
    }
}

/// The `[experiment]` table as written in the file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub m_values: Vec<usize>,
    pub method: Method,
    #[serde(rename = "K", alias = "k")]
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub max_support: Option<MaxSupport>,
    pub lambda: Option<Lambda>,
    /// Sparsity used to pick `lambda = "auto"`.
    pub sparsity: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub runs: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eval_points")]
    pub eval_points: usize,
    #[serde(default)]
    pub dump_points: bool,
    #[serde(default = "default_cache_mib")]
    pub cache_mib: usize,
    #[serde(default = "default_cardinality_cap")]
    pub cardinality_cap: usize,
}

fn default_eval_points() -> usize {
    DEFAULT_EVAL_POINTS
}

fn default_cache_mib() -> usize {
    1024
}

fn default_cardinality_cap() -> usize {
    DEFAULT_CARDINALITY_CAP
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_order")]
    pub n: usize,
    #[serde(default = "default_sparsities")]
    pub sparsities: Vec<usize>,
    #[serde(default = "default_eps")]
    pub eps_values: Vec<f64>,
    #[serde(default = "default_c0")]
    pub c0: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            n: default_order(),
            sparsities: default_sparsities(),
            eps_values: default_eps(),
            c0: default_c0(),
        }
    }
}

fn default_order() -> usize {
    18
}

fn default_sparsities() -> Vec<usize> {
    vec![5, 10, 20, 50]
}

fn default_eps() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

fn default_c0() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Profile {
    /// 5 runs per grid point.
    Fast,
    /// 25 runs per grid point.
    Paper,
}

impl Profile {
    pub fn runs(self) -> usize {
        match self {
            Profile::Fast => 5,
            Profile::Paper => 25,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Solver {
    Omp { n: usize, k: usize },
    LowerOmp { k: usize, max_support: MaxSupport, cache_bytes: usize },
    SrLasso { n: usize, cfg: SrLassoConfig },
}

/// A validated experiment, ready to run.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub problem: ProblemSpec,
    pub example: String,
    pub method: Method,
    pub solver: Solver,
    pub m_values: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    pub eval_points: usize,
    pub dump_points: bool,
}

fn build_problem(cfg: &ProblemConfig) -> Result<(ProblemSpec, DiffusionCoefficient), Failure> {
    let a = cfg.diffusion_coefficient().map_err(Failure::from_core)?;
    let problem = cfg.build().map_err(Failure::from_core)?;
    Ok((problem, a))
}

fn hc_order(e: &ExperimentSection, d: usize) -> Result<usize, Failure> {
    let n = e
        .n
        .ok_or_else(|| Failure::config(format!("method {} needs the hyperbolic-cross order `n`", e.method)))?;
    if n == 0 {
        return Err(Failure::config("`n` must be positive"));
    }
    let bound = hyperbolic_cross_bound(d, n);
    if bound > e.cardinality_cap as f64 {
        return Err(Failure::from_core(CfcError::IndexSetTooLarge {
            bound,
            cap: e.cardinality_cap,
        }));
    }
    Ok(n)
}

impl Experiment {
    /// Validates the file. `runs` and `seed` override the file when given.
    pub fn from_file(
        file: &ConfigFile,
        profile: Option<Profile>,
        seed: Option<u64>,
    ) -> Result<Self, Failure> {
        let e = file
            .experiment
            .as_ref()
            .ok_or_else(|| Failure::config("missing table [experiment]"))?;
        if e.m_values.is_empty() {
            return Err(Failure::config("m_values must not be empty"));
        }
        if let Some(bad) = e.m_values.iter().find(|&&m| m == 0) {
            return Err(Failure::config(format!("m_values must be positive, got {bad}")));
        }
        if e.eval_points == 0 {
            return Err(Failure::config("eval_points must be positive"));
        }
        let runs = match (profile, e.runs) {
            (Some(p), _) => p.runs(),
            (None, Some(0)) => return Err(Failure::config("runs must be positive")),
            (None, Some(r)) => r,
            (None, None) => Profile::Fast.runs(),
        };
        let (problem, a) = build_problem(&file.problem)?;
        let d = problem.dimension();
        let k_required = || {
            e.k.filter(|&k| k > 0)
                .ok_or_else(|| Failure::config(format!("method {} needs a positive `K`", e.method)))
        };
        let solver = match e.method {
            Method::Omp => {
                let (n, k) = (hc_order(e, d)?, k_required()?);
                let columns = enumerate_hyperbolic_cross_capped(d, n, e.cardinality_cap)
                    .map_err(Failure::from_core)?
                    .len();
                let m_min = *e.m_values.iter().min().expect("checked nonempty");
                if k > columns.min(m_min) {
                    return Err(Failure::config(format!(
                        "K = {k} exceeds min(m, N) = {} (N = {columns} indices)",
                        columns.min(m_min)
                    )));
                }
                Solver::Omp { n, k }
            }
            Method::LowerOmp => {
                if let Some(MaxSupport::Fixed(0)) = e.max_support {
                    return Err(Failure::config("max_support must be positive"));
                }
                Solver::LowerOmp {
                    k: k_required()?,
                    max_support: e.max_support.unwrap_or(MaxSupport::Unlimited),
                    cache_bytes: e.cache_mib << 20,
                }
            }
            Method::SrLasso => {
                let n = hc_order(e, d)?;
                let lambda = match e.lambda {
                    None => return Err(Failure::config("method sr_lasso needs `lambda`")),
                    Some(Lambda::Value(x)) => x,
                    Some(Lambda::Auto) => {
                        let s = e.sparsity.ok_or_else(|| {
                            Failure::config("lambda = \"auto\" needs `sparsity`")
                        })?;
                        let constants = riesz_constants(&a, file.problem.rho).map_err(Failure::from_core)?;
                        lambda_range(&constants, s)
                            .map_err(|err| Failure::config(format!("lambda = \"auto\": {err}")))?
                            .1
                    }
                };
                let mut cfg = SrLassoConfig::new(lambda);
                if let Some(tol) = e.tol {
                    cfg.tol = tol;
                }
                if let Some(it) = e.max_iter {
                    cfg.max_iter = it;
                }
                cfg.validate().map_err(Failure::from_core)?;
                Solver::SrLasso { n, cfg }
            }
        };
        Ok(Experiment {
            example: file.problem.example.as_ref().map(ToString::to_string).unwrap_or_default(),
            problem,
            method: e.method,
            solver,
            m_values: e.m_values.clone(),
            runs,
            seed: seed.unwrap_or(e.seed),
            eval_points: e.eval_points,
            dump_points: e.dump_points,
        })
    }
}
