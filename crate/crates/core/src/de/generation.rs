use rand::Rng;

use super::{
    binomial_crossover, donor_vector, init_genome, mutate_rates, pick_donors, select, Evaluation, Evaluator,
    GeneBounds, Genome, Individual, Population, Rates,
};
use crate::exec::Execution;
use crate::restart::{RestartEvent, RestartPolicy, Strategy};
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeConfig {
    pub policy: RestartPolicy,
    pub execution: Execution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub generation: u64,
    pub high_fitness: f64,
    pub mean_fitness: f64,
    pub low_fitness: f64,
    pub mean_cr: f64,
    pub mean_f: f64,
    pub replacements: usize,
    pub evaluations: usize,
    pub successes: usize,
    pub events: Vec<RestartEvent>,
}

impl GenerationStats {
    pub fn of(pop: &Population, generation: u64) -> Self {
        let n = pop.len() as f64;
        let fit = pop.members.iter().map(|m| m.fitness);
        Self {
            generation,
            high_fitness: fit.clone().fold(f64::NEG_INFINITY, f64::max),
            mean_fitness: fit.clone().sum::<f64>() / n,
            low_fitness: fit.fold(f64::INFINITY, f64::min),
            mean_cr: pop.members.iter().map(|m| m.rates.cr).sum::<f64>() / n,
            mean_f: pop.members.iter().map(|m| m.rates.f).sum::<f64>() / n,
            replacements: 0,
            evaluations: 0,
            successes: pop.members.iter().filter(|m| m.success).count(),
            events: Vec::new(),
        }
    }

    /// Number of rate reinitialisations (affected slots) this generation.
    pub fn restarted_slots(&self) -> usize {
        self.events.iter().map(|e| e.changes.len()).sum()
    }
}

fn evaluate_or_fail<E: Evaluator>(evaluator: &E, genome: &Genome, seed: u64) -> Evaluation {
    evaluator.evaluate(genome, seed).unwrap_or(Evaluation::FAILED)
}

/// Random initial population, evaluated as generation 0.
pub fn random_population<E: Evaluator, R: Rng + ?Sized>(
    n: usize,
    bounds: &GeneBounds,
    evaluator: &E,
    cfg: &DeConfig,
    run_seed: u64,
    rng: &mut R,
) -> Population {
    let seeds: Vec<(Genome, Rates)> =
        (0..n).map(|_| (init_genome(bounds, rng), cfg.policy.initial_rates(rng))).collect();
    let evals = cfg
        .execution
        .map_indexed(&seeds, |slot, (g, _)| evaluate_or_fail(evaluator, g, derive_seed(run_seed, &[0, slot as u64])));
    Population::new(seeds.into_iter().zip(evals).map(|((g, r), e)| Individual::new(g, r, e)).collect())
}

/// One full generation: build every child from the current population,
/// evaluate all children (possibly concurrently), then select and apply the
/// restart policy sequentially.
///
/// All draws from `rng` happen on this thread in slot order; each child
/// evaluation gets the stream `derive_seed(run_seed, [generation, slot])`.
pub fn generation_step<E: Evaluator, R: Rng + ?Sized>(
    pop: &mut Population,
    evaluator: &E,
    bounds: &GeneBounds,
    cfg: &DeConfig,
    generation: u64,
    run_seed: u64,
    rng: &mut R,
) -> GenerationStats {
    let n = pop.len();
    let strategy = cfg.policy.strategy;

    let children: Vec<(Genome, Rates)> = (0..n)
        .map(|i| {
            let parent = &pop.members[i];
            let rates = match strategy {
                Strategy::Static => Rates::STATIC,
                _ => mutate_rates(parent.rates, rng),
            };
            let [r1, r2, r3] = pick_donors(n, i, rng);
            let donor = donor_vector(
                &pop.members[r1].genome,
                &pop.members[r2].genome,
                &pop.members[r3].genome,
                rates.f,
                bounds,
            );
            (binomial_crossover(&parent.genome, &donor, rates.cr, rng), rates)
        })
        .collect();

    let evals = cfg.execution.map_indexed(&children, |slot, (g, _)| {
        evaluate_or_fail(evaluator, g, derive_seed(run_seed, &[generation, slot as u64]))
    });

    let previous_best = pop.best_fitness_seen;
    let mut replaced = Vec::with_capacity(n);
    let members = std::mem::take(&mut pop.members);
    pop.members = members
        .into_iter()
        .zip(children.into_iter().zip(evals))
        .map(|(parent, ((genome, rates), eval))| {
            let (winner, rep) = select(parent, Individual::new(genome, rates, eval));
            replaced.push(rep);
            winner
        })
        .collect();

    let current_best = pop.best_fitness();
    let best_improved = current_best > previous_best;
    if best_improved {
        pop.best_fitness_seen = current_best;
    }
    let events = cfg.policy.apply(pop, &replaced, best_improved, generation, rng);

    GenerationStats {
        replacements: replaced.iter().filter(|r| **r).count(),
        evaluations: n,
        events,
        ..GenerationStats::of(pop, generation)
    }
}
