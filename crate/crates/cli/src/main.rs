use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use std::path::PathBuf;
use std::process::ExitCode;

use hoverevo::restart::Strategy;
use hoverevo::runner::{compare_strategies, read_summaries, run_experiment, write_comparison, ExperimentConfig};
use hoverevo::{Error, Execution};

#[derive(Parser)]
#[command(name = "hoverevo", version, about = "Evolve hexacopter hover controllers with self-adaptive DE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeats of one or all restart strategies.
    Run(RunArgs),
    /// Pairwise U-tests between the strategies in a results directory.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (TOML); flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// static, adapt, indiv, global or all.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    repeats: Option<u32>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pop_size: Option<usize>,
    #[arg(long)]
    restart_threshold: Option<u32>,
    #[arg(long)]
    max_generations: Option<u64>,
    /// Disable sensor noise.
    #[arg(long)]
    no_noise: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit successfully even if some runs hit the generation cap.
    #[arg(long)]
    allow_nonconverged: bool,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Directory holding summary_<strategy>.csv files.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::ScheduleRange(_) | Error::InsufficientData(_) => 1,
        Error::Seeding { .. } => 2,
        Error::NotConverged { .. } => 3,
        Error::Io { .. } | Error::Csv { .. } => 4,
    }
}

fn parse_strategies(s: &str) -> Result<Vec<Strategy>, Error> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Strategy::ALL.to_vec());
    }
    s.split(',').map(|p| p.parse().map_err(Error::Config)).collect()
}

fn build_config(a: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| match e {
            Error::Io { path, source } => Error::Config(format!("cannot read {}: {source}", path.display())),
            e => e,
        })?,
        None => ExperimentConfig::default(),
    };
    let r = &mut cfg.run;
    if let Some(s) = &a.strategy {
        r.strategies = parse_strategies(s)?;
    }
    if let Some(v) = a.repeats {
        r.repeats = v;
    }
    if let Some(v) = a.seed {
        r.seed = v;
    }
    if let Some(v) = a.pop_size {
        r.population_size = v;
    }
    if let Some(v) = a.restart_threshold {
        r.restart_threshold = v;
        for s in r.strategies.iter().filter(|s| !s.uses_restarts()) {
            warn!("--restart-threshold has no effect on strategy {s}, which never restarts");
        }
    }
    if let Some(v) = a.max_generations {
        r.max_generations = v;
    }
    if let Some(v) = &a.out {
        r.out = v.clone();
    }
    r.allow_nonconverged |= a.allow_nonconverged;
    if a.no_noise {
        cfg.task.sensor.noise_enabled = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(a: RunArgs) -> Result<(), Error> {
    let cfg = build_config(&a)?;
    let execution = if a.sequential { Execution::Sequential } else { Execution::default() };
    info!(
        "running {} x {} repeats, population {}, output {}",
        cfg.run.strategies.iter().map(|s| s.name()).collect::<Vec<_>>().join(","),
        cfg.run.repeats,
        cfg.run.population_size,
        cfg.run.out.display()
    );
    let summaries = run_experiment(&cfg, execution)?;
    for s in &summaries {
        info!(
            "{} r{:02}: conv {} high {:.1} mean {:.1} low {:.1} cr {:.3} f {:.3} restarts {}{}",
            s.strategy,
            s.repeat,
            s.conv,
            s.high_f,
            s.mean_f,
            s.low_f,
            s.cr,
            s.f,
            s.restarts,
            if s.converged { "" } else { " (not converged)" }
        );
    }
    Ok(())
}

fn compare(a: CompareArgs) -> Result<(), Error> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Error::Config("--alpha must lie in (0, 1)".into()));
    }
    let summaries = read_summaries(&a.input)?;
    let comparisons = compare_strategies(&summaries, a.alpha)?;
    let md = write_comparison(&a.input, &comparisons, a.alpha)?;
    print!("{md}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // Usage errors share the configuration exit code; 2 is reserved for
    // seeding failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
