//! Self-adaptive DE/rand/1/bin.
//!
//! Each individual carries its own crossover rate and differential weight.
//! A child copies its parent's rates, perturbs them lognormally, and then
//! uses the perturbed rates to build its own donor and crossover mask.
//! Selection is greedy and strictly one-to-one: child `i` only ever competes
//! with parent `i`.

mod generation;
mod ops;

pub use generation::{generation_step, random_population, DeConfig, GenerationStats};
pub use ops::{
    binomial_crossover, binomial_crossover_with, donor_vector, init_genome, init_rates, mutate_rates, perturb_rates,
    pick_donors, select,
};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Gene caps are this multiple of each gene's initialisation upper bound.
pub const CAP_FACTOR: f64 = 10.0;

pub const CR_MAX: f64 = 1.0;
pub const F_MAX: f64 = 2.0;

/// Per-gene initialisation ranges `(0, upper]`. Evolved genes are kept in
/// `[0, CAP_FACTOR * upper]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneBounds {
    init_upper: Vec<f64>,
}

impl GeneBounds {
    pub fn new(init_upper: Vec<f64>) -> Option<Self> {
        if init_upper.is_empty() || init_upper.iter().any(|u| !(u.is_finite() && *u > 0.0)) {
            return None;
        }
        Some(Self { init_upper })
    }

    pub fn uniform(len: usize, upper: f64) -> Option<Self> {
        Self::new(vec![upper; len])
    }

    pub fn len(&self) -> usize {
        self.init_upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.init_upper.is_empty()
    }

    pub fn init_upper(&self, i: usize) -> f64 {
        self.init_upper[i]
    }

    pub fn cap(&self, i: usize) -> f64 {
        self.init_upper[i] * CAP_FACTOR
    }

    pub fn clamp(&self, i: usize, x: f64) -> f64 {
        x.clamp(0.0, self.cap(i))
    }

    pub fn contains(&self, genome: &Genome) -> bool {
        genome.len() == self.len() && genome.iter().enumerate().all(|(i, &g)| (0.0..=self.cap(i)).contains(&g))
    }
}

/// A real-valued solution vector. For the hover task this is 18 PID gains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome(Vec<f64>);

impl Genome {
    pub fn new(genes: Vec<f64>) -> Self {
        Self(genes)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for Genome {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Genome {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Crossover rate and differential weight, `0 < cr <= 1`, `0 < f <= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub cr: f64,
    pub f: f64,
}

impl Rates {
    /// Baseline rates used by the STATIC strategy.
    pub const STATIC: Rates = Rates { cr: 0.5, f: 0.8 };

    pub fn new(cr: f64, f: f64) -> Option<Self> {
        let r = Rates { cr, f };
        r.in_bounds().then_some(r)
    }

    pub fn in_bounds(&self) -> bool {
        self.cr > 0.0 && self.cr <= CR_MAX && self.f > 0.0 && self.f <= F_MAX
    }

    /// Clamp raw values into the rate box. The open lower bound maps to the
    /// smallest positive normal float.
    pub fn clamped(cr: f64, f: f64) -> Self {
        let cr = if cr.is_nan() { CR_MAX } else { cr };
        let f = if f.is_nan() { F_MAX } else { f };
        Rates { cr: cr.clamp(f64::MIN_POSITIVE, CR_MAX), f: f.clamp(f64::MIN_POSITIVE, F_MAX) }
    }
}

impl fmt::Display for Rates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(cr={:.4}, f={:.4})", self.cr, self.f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub rates: Rates,
    pub fitness: f64,
    pub restart_counter: u32,
    pub success: bool,
}

impl Individual {
    pub fn new(genome: Genome, rates: Rates, eval: Evaluation) -> Self {
        Self { genome, rates, fitness: eval.fitness, restart_counter: 0, success: eval.success }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub members: Vec<Individual>,
    pub global_counter: u32,
    pub best_fitness_seen: f64,
}

impl Population {
    pub fn new(members: Vec<Individual>) -> Self {
        let best = members.iter().map(|m| m.fitness).fold(f64::NEG_INFINITY, f64::max);
        Self { members, global_counter: 0, best_fitness_seen: best }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> Option<&Individual> {
        self.members.iter().max_by(|a, b| a.fitness.total_cmp(&b.fitness))
    }

    pub fn best_fitness(&self) -> f64 {
        self.members.iter().map(|m| m.fitness).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn all_successful(&self) -> bool {
        !self.members.is_empty() && self.members.iter().all(|m| m.success)
    }
}

/// Outcome of evaluating one genome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub success: bool,
}

impl Evaluation {
    /// What a failed evaluation counts as: a controller that never flew.
    pub const FAILED: Evaluation = Evaluation { fitness: 0.0, success: false };
}

#[derive(Debug, thiserror::Error)]
#[error("evaluation failed: {0}")]
pub struct EvalError(pub String);

/// Fitness function plumbing for the optimiser. Higher is better.
///
/// `seed` identifies the evaluation's private random stream; implementations
/// must be deterministic given `(genome, seed)`.
pub trait Evaluator: Sync {
    fn evaluate(&self, genome: &Genome, seed: u64) -> Result<Evaluation, EvalError>;
}

impl<F> Evaluator for F
where
    F: Fn(&Genome, u64) -> Result<Evaluation, EvalError> + Sync,
{
    fn evaluate(&self, genome: &Genome, seed: u64) -> Result<Evaluation, EvalError> {
        self(genome, seed)
    }
}
