//! Run summaries and the two-sided Mann-Whitney U test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::de::{GenerationStats, Population};
use crate::error::{Error, Result};
use crate::restart::Strategy;

/// Exact p-values are computed when `n1 * n2` is at most this.
pub const EXACT_LIMIT: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    /// Exact when `n1 * n2 <= EXACT_LIMIT`, normal approximation otherwise.
    Auto,
    /// Permutation distribution of the rank sum, ties included.
    Exact,
    /// Normal approximation with tie and continuity correction.
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UTestResult {
    /// U of the first sample: pairs where it is larger, ties counting half.
    pub u1: f64,
    /// `min(u1, n1 * n2 - u1)`.
    pub u: f64,
    pub n1: usize,
    pub n2: usize,
    /// Two-sided p-value.
    pub p_value: f64,
    pub method: PMethod,
}

impl UTestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Midranks (1-based) of `values`, ties sharing the average rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Mann-Whitney U test with the default p-value method.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<UTestResult> {
    mann_whitney_u_with(a, b, PMethod::Auto)
}

pub fn mann_whitney_u_with(a: &[f64], b: &[f64], method: PMethod) -> Result<UTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("each U-test sample needs at least one value".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InsufficientData("U-test samples contain NaN".into()));
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let nn = (n1 * n2) as f64;
    let u = u1.min(nn - u1);

    let method = match method {
        PMethod::Auto if n1 * n2 <= EXACT_LIMIT => PMethod::Exact,
        PMethod::Auto => PMethod::Normal,
        m => m,
    };
    let all_tied = pooled.iter().all(|v| *v == pooled[0]);
    let p_value = if all_tied {
        1.0
    } else if method == PMethod::Exact {
        exact_p(&ranks, n1)
    } else {
        normal_p(&pooled, u1, n1, n2)
    };
    Ok(UTestResult { u1, u, n1, n2, p_value, method })
}

/// Exact two-sided p: the fraction of size-`n1` subsets of the pooled
/// ranks whose rank sum is at least as far from its mean as the observed.
/// Midranks are multiples of 1/2, so sums are tracked in half-units.
fn exact_p(ranks: &[f64], n1: usize) -> f64 {
    let n = ranks.len();
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    // Enumerate over the smaller group; the distribution is symmetric in
    // which group is picked.
    let (k, observed): (usize, usize) =
        if n1 <= n - n1 { (n1, doubled[..n1].iter().sum()) } else { (n - n1, doubled[n1..].iter().sum()) };
    let max_sum: usize = doubled.iter().sum();
    // counts[j][s]: subsets of size j with doubled rank sum s.
    let mut counts = vec![vec![0u128; max_sum + 1]; k + 1];
    counts[0][0] = 1;
    for &r in &doubled {
        for j in (1..=k).rev() {
            let (lo, hi) = counts.split_at_mut(j);
            for s in (r..=max_sum).rev() {
                let c = lo[j - 1][s - r];
                if c != 0 {
                    hi[0][s] += c;
                }
            }
        }
    }
    // Mean doubled sum is k (n + 1); compare doubled distances.
    let centre = (k * (n + 1)) as i128;
    let obs_dist = (observed as i128 - centre).abs();
    let (extreme, total) = counts[k].iter().enumerate().fold((0u128, 0u128), |(e, t), (s, &c)| {
        let far = (s as i128 - centre).abs() >= obs_dist;
        (e + if far { c } else { 0 }, t + c)
    });
    (extreme as f64 / total as f64).min(1.0)
}

fn normal_p(pooled: &[f64], u1: f64, n1: usize, n2: usize) -> f64 {
    let n = (n1 + n2) as f64;
    let nn = (n1 * n2) as f64;
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = nn / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return 1.0;
    }
    let dev = ((u1 - nn / 2.0).abs() - 0.5).max(0.0);
    let z = dev / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * std_normal.sf(z)).min(1.0)
}

/// True iff every member completed both evaluation flights.
pub fn detect_convergence(pop: &Population) -> bool {
    pop.all_successful()
}

/// Table-style metrics of one run, taken at the convergence generation (or
/// the last generation if the run did not converge).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub strategy: Strategy,
    pub repeat: u32,
    pub seed: u64,
    /// Convergence generation, or the number of generations run if the
    /// run hit its cap.
    pub conv: u64,
    pub high_f: f64,
    pub mean_f: f64,
    pub low_f: f64,
    pub cr: f64,
    pub f: f64,
    /// Rate reinitialisations (affected slots) up to `conv`.
    pub restarts: usize,
    pub converged: bool,
}

/// Summarise a run from its per-generation records (generation 0 first).
///
/// The summary row is the first generation `>= 1` whose population was
/// fully successful; without one, the last record is used and `converged`
/// is false.
pub fn summarize(
    strategy: Strategy,
    repeat: u32,
    seed: u64,
    history: &[GenerationStats],
    pop_size: usize,
) -> Result<RunSummary> {
    let last = history.last().ok_or_else(|| Error::InsufficientData("empty run history".into()))?;
    let at = history.iter().find(|g| g.generation >= 1 && g.successes == pop_size);
    let row = at.unwrap_or(last);
    let restarts = history.iter().take_while(|g| g.generation <= row.generation).map(|g| g.restarted_slots()).sum();
    Ok(RunSummary {
        strategy,
        repeat,
        seed,
        conv: row.generation,
        high_f: row.high_fitness,
        mean_f: row.mean_fitness,
        low_f: row.low_fitness,
        cr: row.mean_cr,
        f: row.mean_f,
        restarts,
        converged: at.is_some(),
    })
}
