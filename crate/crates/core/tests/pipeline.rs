//! End-to-end flows through the public API, including the file formats that
//! other tools consume.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use cfc::analysis::{gram_matrix, hermitian_eigenvalues, riesz_constants};
use cfc::collocation::{assemble, sample_points, CollocationSystem};
use cfc::evaluation::{geometric_stats, EvaluationSet};
use cfc::multiindex::{enumerate_hyperbolic_cross, IndexSet};
use cfc::problem::{DiffusionCoefficient, ProblemConfig, ProblemSpec};
use cfc::recovery::{
    adaptive_lower_omp_with, least_squares_on_support, omp, sr_lasso, LowerOmpCaps,
    SrLassoConfig, TraceWriter,
};

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("cfc-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn system_dump_survives_a_file_roundtrip() {
    let problem = ProblemSpec::example(2, 4, 0.5).unwrap();
    let plan = sample_points(64, 4, 3).unwrap();
    let sys = assemble(&problem, &enumerate_hyperbolic_cross(4, 3).unwrap(), &plan).unwrap();
    let path = scratch("system.bin");
    sys.write_dump(BufWriter::new(File::create(&path).unwrap())).unwrap();
    let back = CollocationSystem::read_dump(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back, sys);
}

#[test]
fn points_csv_parses_back_exactly() {
    let plan = sample_points(50, 3, 8).unwrap();
    let mut buf = Vec::new();
    plan.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3"));
    for (line, p) in lines.zip(plan.points()) {
        let parsed: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(parsed, p);
    }
}

#[test]
fn omp_then_restricted_least_squares_agree() {
    let problem = ProblemSpec::example(1, 4, 0.5).unwrap();
    let cols = enumerate_hyperbolic_cross(4, 8).unwrap();
    let plan = sample_points(400, 4, 21).unwrap();
    let sys = assemble(&problem, &cols, &plan).unwrap();
    let greedy = omp(&sys, 6).unwrap();
    let refit = least_squares_on_support(&sys, &greedy.index_set).unwrap();
    for (nu, c) in &greedy.coefficients {
        assert!((refit.coefficients[nu] - c).norm() <= 1e-10 * c.norm());
    }
    let exact = problem.exact.clone().unwrap();
    let err = EvaluationSet::new(5000, 4, 1)
        .unwrap()
        .solution_error(exact.as_ref(), &greedy, Some(problem.rescaling()))
        .unwrap();
    assert!(err.relative_l2 < 1e-10);
}

#[test]
fn adaptive_trace_is_written() {
    let problem = ProblemSpec::example(2, 3, 0.5).unwrap();
    let plan = sample_points(300, 3, 4).unwrap();
    let path = scratch("trace.csv");
    let mut trace = TraceWriter::new(BufWriter::new(File::create(&path).unwrap())).unwrap();
    let sol = adaptive_lower_omp_with(&problem, &plan, 15, LowerOmpCaps::default(), |rec, _| {
        trace.record(rec)
    })
    .unwrap();
    trace.into_inner().flush().unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "iteration,index_set_size,residual,selected");
    assert_eq!(rows.len(), 1 + sol.iterations);
    assert!(rows[1].starts_with("1,1,"));
    assert!(rows[1].ends_with("\"(0,0,0)\""));
}

#[test]
fn sr_lasso_on_a_collocation_system() {
    let problem = ProblemSpec::example(1, 2, 0.5).unwrap();
    let cols = enumerate_hyperbolic_cross(2, 6).unwrap();
    let plan = sample_points(60, 2, 2).unwrap();
    let sys = assemble(&problem, &cols, &plan).unwrap();
    let cfg = SrLassoConfig::new(1e-3);
    let sol = sr_lasso(&sys, &cfg).unwrap();
    // reference run with ten times the iteration budget and a tighter gap
    let reference = sr_lasso(
        &sys,
        &SrLassoConfig {
            lambda: 1e-3,
            tol: 1e-12,
            max_iter: 10 * cfg.max_iter,
        },
    )
    .unwrap();
    let (p, q) = (sol.objective.unwrap(), reference.objective.unwrap());
    assert!(p - q <= cfg.tol * (1.0 + q) + 1e-12, "{p} vs {q}");
    let exact = problem.exact.clone().unwrap();
    let err = EvaluationSet::new(4000, 2, 3)
        .unwrap()
        .solution_error(exact.as_ref(), &sol, Some(problem.rescaling()))
        .unwrap();
    assert!(err.relative_l2 < 0.1, "{}", err.relative_l2);
}

#[test]
fn riesz_bounds_hold_when_the_condition_holds() {
    // a small oscillation satisfies the sufficient condition
    let mut modes = std::collections::BTreeMap::new();
    modes.insert([1, 0].into(), cfc::Complex64::new(0.01, 0.0));
    modes.insert([-1, 0].into(), cfc::Complex64::new(0.01, 0.0));
    let a = DiffusionCoefficient::new(2, 1.0, modes).unwrap();
    let k = riesz_constants(&a, 0.5).unwrap();
    assert!(k.condition_satisfied);
    for n in [2, 4, 8] {
        let set = IndexSet::from_indices(2, enumerate_hyperbolic_cross(2, n).unwrap()).unwrap();
        let ev = hermitian_eigenvalues(&gram_matrix(&a, 0.5, &set).unwrap()).unwrap();
        assert!(ev[0] >= k.b_phi - 1e-12, "{} < {}", ev[0], k.b_phi);
        assert!(*ev.last().unwrap() <= k.big_b_phi + 1e-12);
    }
}

#[test]
fn monte_carlo_error_is_consistent() {
    let problem = ProblemSpec::example(3, 3, 0.5).unwrap();
    let exact = problem.exact.clone().unwrap();
    let plan = sample_points(200, 3, 6).unwrap();
    let sol = adaptive_lower_omp_with(&problem, &plan, 10, LowerOmpCaps::default(), |_, _| Ok(())).unwrap();
    let mut within = 0;
    for seed in 0..20 {
        let small = EvaluationSet::new(10_000, 3, seed)
            .unwrap()
            .solution_error(exact.as_ref(), &sol, Some(problem.rescaling()))
            .unwrap();
        let large = EvaluationSet::new(100_000, 3, 1000 + seed)
            .unwrap()
            .solution_error(exact.as_ref(), &sol, Some(problem.rescaling()))
            .unwrap();
        if (small.relative_l2 - large.relative_l2).abs() < 3.0 * small.std_error.hypot(large.std_error) {
            within += 1;
        }
    }
    // a 3-sigma band should hold for nearly every seed
    assert!(within >= 18, "{within}/20");
    let stats = geometric_stats(&[0.1, 0.2]).unwrap();
    assert!(stats.geo_mean > 0.1);
}

#[test]
fn problem_config_builds_a_runnable_problem() {
    let cfg = ProblemConfig::from_toml(
        "dimension = 3\nrho = 0.5\nexample = 2\ndiffusion = \"paper\"\n",
    )
    .unwrap();
    let problem = cfg.build().unwrap();
    assert_eq!(problem.dimension(), 3);
    let plan = sample_points(10, 3, 1).unwrap();
    assert!(assemble(&problem, &enumerate_hyperbolic_cross(3, 2).unwrap(), &plan).is_ok());
}
