use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::restart::Strategy;
use crate::stats::{mann_whitney_u, RunSummary};

/// Summary columns compared between strategies.
pub const METRICS: [&str; 7] = ["conv", "high_f", "mean_f", "low_f", "cr", "f", "restarts"];

fn metric(s: &RunSummary, name: &str) -> f64 {
    match name {
        "conv" => s.conv as f64,
        "high_f" => s.high_f,
        "mean_f" => s.mean_f,
        "low_f" => s.low_f,
        "cr" => s.cr,
        "f" => s.f,
        "restarts" => s.restarts as f64,
        other => unreachable!("unknown metric {other}"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub metric: String,
    pub a: Strategy,
    pub b: Strategy,
    pub n_a: usize,
    pub n_b: usize,
    pub median_a: f64,
    pub median_b: f64,
    pub u: f64,
    pub p: f64,
    pub significant: bool,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len().is_multiple_of(2) {
        (s[m - 1] + s[m]) / 2.0
    } else {
        s[m]
    }
}

/// Pairwise two-sided U-tests on every metric between every pair of
/// strategies present. Needs at least two strategies with at least two
/// repeats each.
pub fn compare_strategies(summaries: &[RunSummary], alpha: f64) -> Result<Vec<Comparison>> {
    let mut groups: BTreeMap<Strategy, Vec<&RunSummary>> = BTreeMap::new();
    for s in summaries {
        groups.entry(s.strategy).or_default().push(s);
    }
    if groups.len() < 2 {
        return Err(Error::InsufficientData("comparison needs at least two strategies".into()));
    }
    if let Some((s, g)) = groups.iter().find(|(_, g)| g.len() < 2) {
        return Err(Error::InsufficientData(format!("strategy {s} has {} repeat(s); at least 2 needed", g.len())));
    }
    let keys: Vec<Strategy> = groups.keys().copied().collect();
    let mut out = Vec::new();
    for name in METRICS {
        for (i, &a) in keys.iter().enumerate() {
            for &b in &keys[i + 1..] {
                let xa: Vec<f64> = groups[&a].iter().map(|s| metric(s, name)).collect();
                let xb: Vec<f64> = groups[&b].iter().map(|s| metric(s, name)).collect();
                let t = mann_whitney_u(&xa, &xb)?;
                out.push(Comparison {
                    metric: name.to_string(),
                    a,
                    b,
                    n_a: xa.len(),
                    n_b: xb.len(),
                    median_a: median(&xa),
                    median_b: median(&xb),
                    u: t.u,
                    p: t.p_value,
                    significant: t.significant(alpha),
                });
            }
        }
    }
    Ok(out)
}

/// Read every `summary_*.csv` in `dir`, in file-name order.
pub fn read_summaries(dir: &Path) -> Result<Vec<RunSummary>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with("summary_") && name.ends_with(".csv") {
            paths.push(p);
        }
    }
    paths.sort();
    let mut rows = Vec::new();
    for p in paths {
        let mut r = csv::Reader::from_path(&p).map_err(|e| Error::csv(&p, e))?;
        for row in r.deserialize() {
            rows.push(row.map_err(|e| Error::csv(&p, e))?);
        }
    }
    Ok(rows)
}

/// Write `comparison.csv` and `comparison.md` into `dir`; returns the
/// markdown.
pub fn write_comparison(dir: &Path, comparisons: &[Comparison], alpha: f64) -> Result<String> {
    let csv_path = dir.join("comparison.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::csv(&csv_path, e))?;
    for c in comparisons {
        w.serialize(c).map_err(|e| Error::csv(&csv_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let mut md = String::new();
    let _ = writeln!(md, "# Strategy comparison\n");
    let _ = writeln!(md, "Two-sided Mann-Whitney U tests; `*` marks p < {alpha}.\n");
    let _ = writeln!(md, "| metric | A | B | median A | median B | U | p | |");
    let _ = writeln!(md, "|---|---|---|---:|---:|---:|---:|---|");
    for c in comparisons {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {:.4} | {:.4} | {} | {:.4} | {} |",
            c.metric,
            c.a,
            c.b,
            c.median_a,
            c.median_b,
            c.u,
            c.p,
            if c.significant { "*" } else { "" }
        );
    }
    let md_path = dir.join("comparison.md");
    std::fs::write(&md_path, &md).map_err(|e| Error::io(&md_path, e))?;
    Ok(md)
}
