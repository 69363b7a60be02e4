use std::fs;
use std::path::Path;

use hoverevo::restart::Strategy;
use hoverevo::runner::{
    compare_strategies, generations_path, read_summaries, run_experiment, summary_path, write_comparison,
    ExperimentConfig,
};
use hoverevo::stats::RunSummary;
use hoverevo::{Error, Execution};

fn small(out: &Path, strategies: Vec<Strategy>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.run.strategies = strategies;
    cfg.run.repeats = 2;
    cfg.run.population_size = 6;
    cfg.run.max_generations = 3;
    cfg.run.allow_nonconverged = true;
    cfg.run.seed = 42;
    cfg.run.out = out.to_path_buf();
    cfg
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = walk(dir).into_iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).collect();
    files.sort();
    files.into_iter().map(|p| (p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap())).collect()
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    fs::read_dir(dir)
        .unwrap()
        .flat_map(|e| {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p)
            } else {
                vec![p]
            }
        })
        .collect()
}

#[test]
fn reruns_are_byte_identical_across_backends() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&small(a.path(), vec![Strategy::Static, Strategy::Indiv]), Execution::Parallel).unwrap();
    run_experiment(&small(b.path(), vec![Strategy::Static, Strategy::Indiv]), Execution::Sequential).unwrap();
    let (fa, fb) = (read_all(a.path()), read_all(b.path()));
    assert_eq!(fa.len(), 4 * 2 + 2);
    assert_eq!(fa, fb);
}

#[test]
fn logs_have_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), vec![Strategy::Global]);
    let summaries = run_experiment(&cfg, Execution::default()).unwrap();
    assert_eq!(summaries.len(), 2);

    let gens = fs::read_to_string(generations_path(dir.path(), Strategy::Global, 1)).unwrap();
    let mut lines = gens.lines();
    assert_eq!(lines.next().unwrap(), "generation,high_f,mean_f,low_f,mean_cr,mean_f_rate,restarts,evals");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(!rows.is_empty() && rows.len() <= 4);
    for w in rows.windows(2) {
        assert!(w[1][1] >= w[0][1], "best fitness decreased");
        assert_eq!(w[1][7] - w[0][7], 6.0);
    }
    for r in &rows {
        assert!(r[3] <= r[2] && r[2] <= r[1]);
    }

    let summary = fs::read_to_string(summary_path(dir.path(), Strategy::Global)).unwrap();
    assert_eq!(
        summary.lines().next().unwrap(),
        "strategy,repeat,seed,conv,high_f,mean_f,low_f,cr,f,restarts,converged"
    );
    assert_eq!(read_summaries(dir.path()).unwrap(), summaries);
    assert!(dir.path().join("config.toml").exists());
}

#[test]
fn generation_cap_without_permission_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), vec![Strategy::Static]);
    cfg.run.repeats = 1;
    cfg.run.max_generations = 1;
    cfg.run.allow_nonconverged = false;
    match run_experiment(&cfg, Execution::default()) {
        Err(Error::NotConverged { runs }) => assert_eq!(runs, 1),
        other => panic!("expected non-convergence, got {other:?}"),
    }
    // Logs are still written.
    assert!(summary_path(dir.path(), Strategy::Static).exists());
}

fn summary(strategy: Strategy, repeat: u32, conv: u64, high_f: f64) -> RunSummary {
    RunSummary {
        strategy,
        repeat,
        seed: 0,
        conv,
        high_f,
        mean_f: high_f - 1.0,
        low_f: high_f - 2.0,
        cr: 0.5,
        f: 0.8,
        restarts: 0,
        converged: true,
    }
}

#[test]
fn identical_groups_have_no_significant_pairs() {
    let rows: Vec<RunSummary> = [Strategy::Static, Strategy::Adapt]
        .into_iter()
        .flat_map(|s| (0..10).map(move |r| summary(s, r, 50 + u64::from(r), 1e5 + f64::from(r))))
        .collect();
    let cmp = compare_strategies(&rows, 0.05).unwrap();
    assert!(!cmp.is_empty());
    assert!(cmp.iter().all(|c| !c.significant));
}

#[test]
fn separated_groups_are_flagged() {
    let rows: Vec<RunSummary> = (0..10)
        .map(|r| summary(Strategy::Static, r, 1 + u64::from(r), 1.0))
        .chain((0..10).map(|r| summary(Strategy::Indiv, r, 11 + u64::from(r), 1.0)))
        .collect();
    let cmp = compare_strategies(&rows, 0.05).unwrap();
    let conv = cmp.iter().find(|c| c.metric == "conv").unwrap();
    assert!(conv.significant);
    assert_eq!(conv.p, 2.0 / 184_756.0);

    let dir = tempfile::tempdir().unwrap();
    let md = write_comparison(dir.path(), &cmp, 0.05).unwrap();
    assert!(md.contains("| conv | static | indiv |"));
    assert!(dir.path().join("comparison.csv").exists());
}

#[test]
fn comparison_needs_two_strategies() {
    let rows: Vec<RunSummary> = (0..5).map(|r| summary(Strategy::Static, r, 10, 1.0)).collect();
    assert!(matches!(compare_strategies(&rows, 0.05), Err(Error::InsufficientData(_))));
    let mut two = rows.clone();
    two.push(summary(Strategy::Adapt, 0, 10, 1.0));
    assert!(matches!(compare_strategies(&two, 0.05), Err(Error::InsufficientData(_))));
}
