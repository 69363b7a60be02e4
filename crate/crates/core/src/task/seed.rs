//! Initial population for the hover task: random gain sets that at least
//! get the vehicle off the floor.

use rand::Rng;

use super::{HoverTask, PlantFactory};
use crate::de::{init_genome, GeneBounds, Genome, Individual, Population, Rates};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pid::{CascadeGains, Channel, ControllerLimits};
use crate::restart::RestartPolicy;
use crate::rng::derive_seed;

/// Maximum command each loop may produce from its error limit: PWM
/// microseconds for the attitude and height loops, degrees of tilt for the
/// position loop.
pub const ATTITUDE_COMMAND: f64 = 500.0;
pub const HEIGHT_COMMAND: f64 = 500.0;
pub const POSITION_COMMAND: f64 = 15.0;

/// Initial upper bound for every gene: maximum command over error limit.
/// The same bound is used for P, I and D of a channel.
pub fn hover_bounds(limits: &ControllerLimits) -> GeneBounds {
    let upper = Channel::ALL
        .iter()
        .flat_map(|&ch| {
            let cmd = match ch {
                Channel::Roll | Channel::Pitch | Channel::Yaw => ATTITUDE_COMMAND,
                Channel::Height => HEIGHT_COMMAND,
                Channel::North | Channel::East => POSITION_COMMAND,
            };
            [cmd / limits.error_limit(ch); 3]
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(upper.len(), CascadeGains::GENES);
    GeneBounds::new(upper).expect("positive bounds")
}

/// How many candidates to draw and probe per batch while seeding.
const PROBE_BATCH: usize = 32;

/// Draw random genomes until `n` of them pass the probe flight (a
/// continuous airborne stretch longer than `probe_airborne`), then give each
/// admitted genome a full evaluation as generation 0.
///
/// Genomes and rates are drawn from `rng` in order; probes run in batches
/// (concurrently when `execution` allows) and are admitted in draw order, so
/// the result does not depend on the backend.
pub fn seed_population<F: PlantFactory, R: Rng + ?Sized>(
    task: &HoverTask<F>,
    n: usize,
    bounds: &GeneBounds,
    policy: &RestartPolicy,
    execution: Execution,
    run_seed: u64,
    rng: &mut R,
) -> Result<Population> {
    let max_attempts = task.cfg.max_seed_attempts;
    let mut admitted: Vec<(Genome, Rates)> = Vec::with_capacity(n);
    let mut attempts = 0usize;

    while admitted.len() < n {
        if attempts >= max_attempts {
            return Err(Error::Seeding { attempts, admitted: admitted.len() });
        }
        let batch_len = PROBE_BATCH.min(max_attempts - attempts);
        let batch: Vec<(u64, Genome, Rates)> = (0..batch_len)
            .map(|j| {
                let attempt = (attempts + j) as u64;
                (attempt, init_genome(bounds, rng), policy.initial_rates(rng))
            })
            .collect();
        let passed = execution.map_indexed(&batch, |_, (attempt, g, _)| {
            task.probe(g, derive_seed(run_seed, &[0, 0, *attempt]))
                .map(|f| f.longest_airborne > task.cfg.probe_airborne)
                .unwrap_or(false)
        });
        for ((_, g, r), ok) in batch.into_iter().zip(passed) {
            attempts += 1;
            if ok {
                admitted.push((g, r));
                if admitted.len() == n {
                    break;
                }
            }
        }
    }

    let evals = execution.map_indexed(&admitted, |slot, (g, _)| {
        crate::de::Evaluator::evaluate(task, g, derive_seed(run_seed, &[0, slot as u64]))
            .unwrap_or(crate::de::Evaluation::FAILED)
    });
    Ok(Population::new(admitted.into_iter().zip(evals).map(|((g, r), e)| Individual::new(g, r, e)).collect()))
}
