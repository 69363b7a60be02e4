//! Fitness-stagnation restarts of the self-adaptive rates.
//!
//! INDIV keeps one counter per slot: it counts consecutive generations in
//! which the slot's child failed to replace it. GLOBAL keeps one counter for
//! the population: consecutive generations without a strict improvement of
//! the best fitness. Whichever counter reaches the threshold has its
//! rates redrawn uniformly and its counter zeroed. STATIC and ADAPT never
//! restart.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::de::{init_rates, Individual, Population, Rates};

pub const DEFAULT_THRESHOLD: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Fixed rates `(cr, f) = (0.5, 0.8)`.
    Static,
    /// Self-adaptive rates, no restarts.
    Adapt,
    /// Self-adaptive rates with per-individual restarts.
    Indiv,
    /// Self-adaptive rates with population-wide restarts.
    Global,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Static, Strategy::Adapt, Strategy::Indiv, Strategy::Global];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Static => "static",
            Strategy::Adapt => "adapt",
            Strategy::Indiv => "indiv",
            Strategy::Global => "global",
        }
    }

    pub fn index(self) -> u64 {
        match self {
            Strategy::Static => 0,
            Strategy::Adapt => 1,
            Strategy::Indiv => 2,
            Strategy::Global => 3,
        }
    }

    pub fn self_adaptive(self) -> bool {
        self != Strategy::Static
    }

    pub fn uses_restarts(self) -> bool {
        matches!(self, Strategy::Indiv | Strategy::Global)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" => Ok(Strategy::Static),
            "adapt" => Ok(Strategy::Adapt),
            "indiv" => Ok(Strategy::Indiv),
            "global" => Ok(Strategy::Global),
            other => Err(format!("unknown strategy `{other}` (expected static, adapt, indiv or global)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RestartPolicy {
    pub strategy: Strategy,
    pub threshold: u32,
}

impl RestartPolicy {
    pub fn new(strategy: Strategy, threshold: u32) -> Option<Self> {
        (threshold >= 1).then_some(Self { strategy, threshold })
    }

    pub fn with_default_threshold(strategy: Strategy) -> Self {
        Self { strategy, threshold: DEFAULT_THRESHOLD }
    }

    /// Rates for a newly created population member.
    pub fn initial_rates<R: Rng + ?Sized>(&self, rng: &mut R) -> Rates {
        match self.strategy {
            Strategy::Static => Rates::STATIC,
            _ => init_rates(rng),
        }
    }

    /// Apply the policy once at a generation boundary. `replaced[i]` says
    /// whether slot `i`'s child won selection this generation;
    /// `best_improved` whether the population best strictly increased.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        pop: &mut Population,
        replaced: &[bool],
        best_improved: bool,
        generation: u64,
        rng: &mut R,
    ) -> Vec<RestartEvent> {
        match self.strategy {
            Strategy::Static | Strategy::Adapt => Vec::new(),
            Strategy::Indiv => {
                assert_eq!(replaced.len(), pop.len());
                pop.members
                    .iter_mut()
                    .zip(replaced)
                    .enumerate()
                    .filter_map(|(slot, (ind, &rep))| {
                        update_individual(ind, slot, rep, self.threshold, generation, rng)
                    })
                    .collect()
            }
            Strategy::Global => {
                update_global(pop, best_improved, self.threshold, generation, rng).into_iter().collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartScope {
    Slot(usize),
    All,
}

impl fmt::Display for RestartScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestartScope::Slot(i) => write!(f, "slot{i}"),
            RestartScope::All => f.write_str("all"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateChange {
    pub slot: usize,
    pub old: Rates,
    pub new: Rates,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartEvent {
    pub generation: u64,
    pub scope: RestartScope,
    pub changes: Vec<RateChange>,
}

/// Per-slot counter update for INDIV. Returns the restart event if the
/// counter hit `threshold`.
pub fn update_individual<R: Rng + ?Sized>(
    ind: &mut Individual,
    slot: usize,
    child_replaced_parent: bool,
    threshold: u32,
    generation: u64,
    rng: &mut R,
) -> Option<RestartEvent> {
    if child_replaced_parent {
        ind.restart_counter = 0;
        return None;
    }
    ind.restart_counter += 1;
    if ind.restart_counter < threshold {
        return None;
    }
    let old = ind.rates;
    ind.rates = init_rates(rng);
    ind.restart_counter = 0;
    Some(RestartEvent {
        generation,
        scope: RestartScope::Slot(slot),
        changes: vec![RateChange { slot, old, new: ind.rates }],
    })
}

/// Population counter update for GLOBAL. At the threshold every member's
/// rates are redrawn and all counters are zeroed.
pub fn update_global<R: Rng + ?Sized>(
    pop: &mut Population,
    best_improved: bool,
    threshold: u32,
    generation: u64,
    rng: &mut R,
) -> Option<RestartEvent> {
    if best_improved {
        pop.global_counter = 0;
        return None;
    }
    pop.global_counter += 1;
    if pop.global_counter < threshold {
        return None;
    }
    pop.global_counter = 0;
    let changes = pop
        .members
        .iter_mut()
        .enumerate()
        .map(|(slot, ind)| {
            let old = ind.rates;
            ind.rates = init_rates(rng);
            ind.restart_counter = 0;
            RateChange { slot, old, new: ind.rates }
        })
        .collect();
    Some(RestartEvent { generation, scope: RestartScope::All, changes })
}
