//! Whole experiments: repeats of each strategy, per-generation logs,
//! summary tables and pairwise strategy comparisons.

mod compare;
mod output;

pub use compare::{compare_strategies, read_summaries, write_comparison, Comparison, METRICS};
pub use output::{events_path, generations_path, summary_path, write_events, write_generations, write_summaries};

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::de::{generation_step, DeConfig, GenerationStats};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::restart::{RestartPolicy, Strategy, DEFAULT_THRESHOLD};
use crate::rng::{derive_seed, stream};
use crate::stats::{detect_convergence, summarize, RunSummary};
use crate::task::{hover_bounds, seed_population, HoverTask, TaskConfig};

/// Experiment-level settings, the `[run]` table of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub strategies: Vec<Strategy>,
    pub repeats: u32,
    pub seed: u64,
    pub population_size: usize,
    pub restart_threshold: u32,
    pub max_generations: u64,
    pub allow_nonconverged: bool,
    pub out: PathBuf,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            strategies: Strategy::ALL.to_vec(),
            repeats: 10,
            seed: 1,
            population_size: 20,
            restart_threshold: DEFAULT_THRESHOLD,
            max_generations: 500,
            allow_nonconverged: false,
            out: PathBuf::from("out"),
        }
    }
}

/// A complete experiment: run settings plus the benchmark definition
/// (`[task]`, `[task.vehicle]`, `[task.wind]`, `[task.sensor]`, ...).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSettings,
    pub task: TaskConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        if r.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        if r.repeats < 1 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if r.population_size < 4 {
            return Err(Error::Config("population_size must be at least 4".into()));
        }
        if r.restart_threshold < 1 {
            return Err(Error::Config("restart_threshold must be at least 1".into()));
        }
        if r.max_generations < 1 {
            return Err(Error::Config("max_generations must be at least 1".into()));
        }
        self.task.validate()
    }

    /// Seed of one repeat, independent across strategies and repeats.
    pub fn run_seed(&self, strategy: Strategy, repeat: u32) -> u64 {
        derive_seed(self.run.seed, &[strategy.index(), u64::from(repeat)])
    }
}

/// Everything produced by one repeat.
#[derive(Clone, Debug, PartialEq)]
pub struct RepeatLog {
    pub summary: RunSummary,
    pub history: Vec<GenerationStats>,
}

/// Run one repeat in memory: seed the population, then step generations
/// until every member succeeds or `max_generations` is reached.
pub fn run_repeat(cfg: &ExperimentConfig, strategy: Strategy, repeat: u32, execution: Execution) -> Result<RepeatLog> {
    let seed = cfg.run_seed(strategy, repeat);
    let n = cfg.run.population_size;
    let task = HoverTask::new(cfg.task.clone());
    let bounds = hover_bounds(&cfg.task.controller);
    let policy = RestartPolicy::new(strategy, cfg.run.restart_threshold)
        .ok_or_else(|| Error::Config("restart_threshold must be at least 1".into()))?;
    let de = DeConfig { policy, execution };
    let mut rng = stream(seed);

    let mut pop = seed_population(&task, n, &bounds, &policy, execution, seed, &mut rng)?;
    let mut history = vec![GenerationStats { evaluations: n, ..GenerationStats::of(&pop, 0) }];
    for generation in 1..=cfg.run.max_generations {
        history.push(generation_step(&mut pop, &task, &bounds, &de, generation, seed, &mut rng));
        if detect_convergence(&pop) {
            break;
        }
    }
    let summary = summarize(strategy, repeat, seed, &history, n)?;
    Ok(RepeatLog { summary, history })
}

/// Run one repeat and write its generation and event logs under `out`.
fn run_and_log(cfg: &ExperimentConfig, strategy: Strategy, repeat: u32, execution: Execution) -> Result<RunSummary> {
    let log = run_repeat(cfg, strategy, repeat, execution)?;
    let out = &cfg.run.out;
    write_generations(&generations_path(out, strategy, repeat), &log.history)?;
    write_events(&events_path(out, strategy, repeat), &log.history)?;
    Ok(log.summary)
}

/// Run every repeat of every configured strategy, writing
///
/// * `out/config.toml` — the resolved configuration,
/// * `out/runs/<strategy>_rNN_generations.csv` and `..._events.csv`,
/// * `out/summary_<strategy>.csv`.
///
/// Repeats run concurrently when `execution` allows. Returns the summaries
/// in strategy then repeat order, or [`Error::NotConverged`] (after writing
/// everything) if a run hit the generation cap and that is not allowed.
pub fn run_experiment(cfg: &ExperimentConfig, execution: Execution) -> Result<Vec<RunSummary>> {
    cfg.validate()?;
    let out = &cfg.run.out;
    std::fs::create_dir_all(out.join("runs")).map_err(|e| Error::io(out.join("runs"), e))?;
    let cfg_path = out.join("config.toml");
    std::fs::write(&cfg_path, cfg.to_toml()).map_err(|e| Error::io(&cfg_path, e))?;

    let jobs: Vec<(Strategy, u32)> =
        cfg.run.strategies.iter().flat_map(|&s| (0..cfg.run.repeats).map(move |r| (s, r))).collect();
    let results = execution.map_indexed(&jobs, |_, &(s, r)| run_and_log(cfg, s, r, execution));

    let mut summaries = Vec::with_capacity(jobs.len());
    for result in results {
        summaries.push(result?);
    }
    for &s in &cfg.run.strategies {
        let rows: Vec<RunSummary> = summaries.iter().filter(|x| x.strategy == s).cloned().collect();
        write_summaries(&summary_path(out, s), &rows)?;
    }
    let stuck = summaries.iter().filter(|s| !s.converged).count();
    if stuck > 0 && !cfg.run.allow_nonconverged {
        return Err(Error::NotConverged { runs: stuck });
    }
    Ok(summaries)
}
