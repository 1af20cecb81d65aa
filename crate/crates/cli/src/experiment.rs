//! Executes an [`Experiment`] over its (m, run) grid and writes the tables.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use cfc::collocation::{assemble, sample_points, SamplePlan};
use cfc::evaluation::{geometric_stats, EvaluationSet, GeometricStats};
use cfc::multiindex::enumerate_hyperbolic_cross_capped;
use cfc::recovery::{
    adaptive_lower_omp_with, omp_with, sr_lasso, LowerOmpCaps, RecoveryStatus, SparseSolution,
    TraceWriter,
};
use cfc::rng::derive_seed;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, Solver};
use crate::Failure;

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub m: usize,
    pub run: usize,
    pub seed: u64,
    pub iterations: usize,
    pub support_size: usize,
    pub rel_l2: f64,
    pub status: RecoveryStatus,
}

impl CellResult {
    /// Statuses that count as a cap breach or non-convergence.
    pub fn hit_cap(&self) -> bool {
        matches!(
            self.status,
            RecoveryStatus::SupportCapReached | RecoveryStatus::MaxIterations
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SummaryRow {
    pub m: usize,
    pub runs: usize,
    pub geo_mean: f64,
    pub geo_std: f64,
}

/// JSON companion of `summary.csv`, recording the shared evaluation sample.
#[derive(Debug, Serialize)]
struct SummaryJson<'a> {
    example: &'a str,
    d: usize,
    method: String,
    base_seed: u64,
    eval_seed: u64,
    eval_points: usize,
    rows: &'a [SummaryRow],
}

pub struct RunOptions {
    pub out: PathBuf,
    pub trace: bool,
}

fn cell_path(dir: &Path, prefix: &str, m: usize, run: usize) -> PathBuf {
    dir.join(format!("{prefix}_m{m}_run{run}.csv"))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// Greedy solvers stream `iteration,index_set_size,residual,selected`;
/// SR-LASSO writes `iteration,objective` (best objective so far) afterwards.
fn solve(exp: &Experiment, plan: &SamplePlan, trace: Option<PathBuf>) -> anyhow::Result<SparseSolution> {
    let greedy = !matches!(exp.solver, Solver::SrLasso { .. });
    let mut writer = match &trace {
        Some(p) if greedy => Some(TraceWriter::new(create(p)?)?),
        _ => None,
    };
    let d = exp.problem.dimension();
    let sol = match &exp.solver {
        Solver::Omp { n, k } => {
            let columns = enumerate_hyperbolic_cross_capped(d, *n, usize::MAX)?;
            let system = assemble(&exp.problem, &columns, plan)?;
            omp_with(&system, *k, |rec| match writer.as_mut() {
                Some(w) => w.record(rec),
                None => Ok(()),
            })?
        }
        Solver::LowerOmp {
            k,
            max_support,
            cache_bytes,
        } => {
            let caps = LowerOmpCaps {
                max_support: max_support.resolve(plan.m()),
                cache_bytes: *cache_bytes,
            };
            adaptive_lower_omp_with(&exp.problem, plan, *k, caps, |rec, _| match writer.as_mut() {
                Some(w) => w.record(rec),
                None => Ok(()),
            })?
        }
        Solver::SrLasso { n, cfg } => {
            let columns = enumerate_hyperbolic_cross_capped(d, *n, usize::MAX)?;
            let system = assemble(&exp.problem, &columns, plan)?;
            let sol = sr_lasso(&system, cfg)?;
            if let Some(p) = &trace {
                let mut out = create(p)?;
                writeln!(out, "iteration,objective")?;
                for (i, obj) in sol.objective_history.iter().enumerate() {
                    writeln!(out, "{},{obj:e}", i + 1)?;
                }
                out.flush()?;
            }
            sol
        }
    };
    if let Some(w) = writer {
        w.into_inner().flush()?;
    }
    Ok(sol)
}

fn run_cell(
    exp: &Experiment,
    eval: &EvaluationSet,
    opts: &RunOptions,
    m: usize,
    run: usize,
) -> anyhow::Result<CellResult> {
    let seed = derive_seed(exp.seed, m, run);
    let plan = sample_points(m, exp.problem.dimension(), seed)?;
    if exp.dump_points {
        let p = cell_path(&opts.out.join("points"), "collocation", m, run);
        let mut f = create(&p)?;
        plan.write_csv(&mut f)?;
        f.flush()?;
    }
    let trace = opts
        .trace
        .then(|| cell_path(&opts.out.join("trace"), "trace", m, run));
    let sol = solve(exp, &plan, trace)?;
    let exact = exp
        .problem
        .exact
        .as_ref()
        .context("problem has no exact solution to measure against")?;
    let err = eval.solution_error(exact.as_ref(), &sol, Some(exp.problem.rescaling()))?;
    Ok(CellResult {
        m,
        run,
        seed,
        iterations: sol.iterations,
        support_size: sol.support.len(),
        rel_l2: err.relative_l2,
        status: sol.status,
    })
}

fn summarize(cells: &[CellResult], m: usize) -> SummaryRow {
    let errors: Vec<f64> = cells.iter().filter(|c| c.m == m).map(|c| c.rel_l2).collect();
    // exact recovery (error 0) has no logarithm
    let stats = geometric_stats(&errors).unwrap_or(GeometricStats {
        geo_mean: if errors.iter().any(|&e| e == 0.0) { 0.0 } else { f64::NAN },
        geo_std: f64::NAN,
    });
    SummaryRow {
        m,
        runs: errors.len(),
        geo_mean: stats.geo_mean,
        geo_std: stats.geo_std,
    }
}

/// Runs every cell on the current rayon pool and writes `runs.csv`,
/// `summary.csv` and `summary.json` into `opts.out`.
pub fn run_experiment(exp: &Experiment, opts: &RunOptions) -> Result<Vec<CellResult>, Failure> {
    let io = |e: std::io::Error| Failure::Runtime(e.into());
    fs::create_dir_all(&opts.out).map_err(io)?;
    if opts.trace {
        fs::create_dir_all(opts.out.join("trace")).map_err(io)?;
    }
    let d = exp.problem.dimension();
    let eval = EvaluationSet::new(exp.eval_points, d, exp.seed).map_err(Failure::from_core)?;
    if exp.dump_points {
        let dir = opts.out.join("points");
        fs::create_dir_all(&dir).map_err(io)?;
        let plan = SamplePlan::from_points(eval.points().to_vec(), exp.seed).map_err(Failure::from_core)?;
        let mut f = BufWriter::new(File::create(dir.join("evaluation.csv")).map_err(io)?);
        plan.write_csv(&mut f).map_err(Failure::from_core)?;
        f.flush().map_err(io)?;
    }

    let grid: Vec<(usize, usize)> = exp
        .m_values
        .iter()
        .flat_map(|&m| (0..exp.runs).map(move |r| (m, r)))
        .collect();
    let cells = grid
        .par_iter()
        .map(|&(m, run)| {
            run_cell(exp, &eval, opts, m, run)
                .with_context(|| format!("cell m = {m}, run = {run}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(classify)?;

    let mut runs = csv::Writer::from_path(opts.out.join("runs.csv")).map_err(|e| Failure::Runtime(e.into()))?;
    let method = exp.method.to_string();
    let csv_err = |e: csv::Error| Failure::Runtime(e.into());
    runs.write_record([
        "example", "d", "m", "method", "run", "seed", "iterations", "support_size", "rel_l2", "status",
    ])
    .map_err(csv_err)?;
    for c in &cells {
        runs.write_record([
            exp.example.clone(),
            d.to_string(),
            c.m.to_string(),
            method.clone(),
            c.run.to_string(),
            c.seed.to_string(),
            c.iterations.to_string(),
            c.support_size.to_string(),
            format!("{:e}", c.rel_l2),
            c.status.to_string(),
        ])
        .map_err(csv_err)?;
    }
    runs.flush().map_err(io)?;

    let rows: Vec<SummaryRow> = exp.m_values.iter().map(|&m| summarize(&cells, m)).collect();
    let mut summary = csv::Writer::from_path(opts.out.join("summary.csv")).map_err(csv_err)?;
    summary
        .write_record(["example", "d", "m", "method", "runs", "geo_mean", "geo_std"])
        .map_err(csv_err)?;
    for r in &rows {
        summary
            .write_record([
                exp.example.clone(),
                d.to_string(),
                r.m.to_string(),
                method.clone(),
                r.runs.to_string(),
                format!("{:e}", r.geo_mean),
                format!("{:e}", r.geo_std),
            ])
            .map_err(csv_err)?;
    }
    summary.flush().map_err(io)?;

    let json = SummaryJson {
        example: &exp.example,
        d,
        method,
        base_seed: exp.seed,
        eval_seed: eval.seed(),
        eval_points: eval.len(),
        rows: &rows,
    };
    let text = serde_json::to_string_pretty(&json).map_err(|e| Failure::Runtime(e.into()))?;
    fs::write(opts.out.join("summary.json"), text + "\n").map_err(io)?;
    Ok(cells)
}

/// Cap breaches inside a cell map to the cap exit code.
fn classify(err: anyhow::Error) -> Failure {
    let cap = err
        .chain()
        .any(|e| matches!(e.downcast_ref::<cfc::CfcError>(), Some(cfc::CfcError::IndexSetTooLarge { .. })));
    if cap {
        Failure::Cap(err)
    } else {
        Failure::Runtime(err)
    }
}
