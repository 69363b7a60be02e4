use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::de::GenerationStats;
use crate::error::{Error, Result};
use crate::restart::{RestartScope, Strategy};
use crate::stats::RunSummary;

pub fn generations_path(out: &Path, strategy: Strategy, repeat: u32) -> PathBuf {
    out.join("runs").join(format!("{strategy}_r{repeat:02}_generations.csv"))
}

pub fn events_path(out: &Path, strategy: Strategy, repeat: u32) -> PathBuf {
    out.join("runs").join(format!("{strategy}_r{repeat:02}_events.csv"))
}

pub fn summary_path(out: &Path, strategy: Strategy) -> PathBuf {
    out.join(format!("summary_{strategy}.csv"))
}

#[derive(Serialize)]
struct GenerationRow {
    generation: u64,
    high_f: f64,
    mean_f: f64,
    low_f: f64,
    mean_cr: f64,
    mean_f_rate: f64,
    restarts: usize,
    evals: usize,
}

#[derive(Serialize)]
struct EventRow {
    generation: u64,
    scope: String,
    slot: usize,
    old_cr: f64,
    old_f: f64,
    new_cr: f64,
    new_f: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| Error::csv(path, e))?;
    // Written by hand so an empty table still gets its header.
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-generation log; `evals` is cumulative.
pub fn write_generations(path: &Path, history: &[GenerationStats]) -> Result<()> {
    let mut evals = 0;
    let rows = history.iter().map(|g| {
        evals += g.evaluations;
        GenerationRow {
            generation: g.generation,
            high_f: g.high_fitness,
            mean_f: g.mean_fitness,
            low_f: g.low_fitness,
            mean_cr: g.mean_cr,
            mean_f_rate: g.mean_f,
            restarts: g.restarted_slots(),
            evals,
        }
    });
    write_rows(path, rows, &["generation", "high_f", "mean_f", "low_f", "mean_cr", "mean_f_rate", "restarts", "evals"])
}

/// Restart log, one row per reinitialised slot.
pub fn write_events(path: &Path, history: &[GenerationStats]) -> Result<()> {
    let rows = history.iter().flat_map(|g| &g.events).flat_map(|ev| {
        ev.changes.iter().map(move |c| EventRow {
            generation: ev.generation,
            scope: match ev.scope {
                RestartScope::All => "all".to_string(),
                RestartScope::Slot(_) => "slot".to_string(),
            },
            slot: c.slot,
            old_cr: c.old.cr,
            old_f: c.old.f,
            new_cr: c.new.cr,
            new_f: c.new.f,
        })
    });
    write_rows(path, rows, &["generation", "scope", "slot", "old_cr", "old_f", "new_cr", "new_f"])
}

pub fn write_summaries(path: &Path, rows: &[RunSummary]) -> Result<()> {
    write_rows(
        path,
        rows,
        &["strategy", "repeat", "seed", "conv", "high_f", "mean_f", "low_f", "cr", "f", "restarts", "converged"],
    )
}
