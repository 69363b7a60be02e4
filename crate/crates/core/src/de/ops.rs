use rand::Rng;
use rand_distr::StandardNormal;

use super::{GeneBounds, Genome, Individual, Rates, CR_MAX, F_MAX};
use crate::rng::unit_open_closed;

/// Fresh rates, `cr ~ U(0, 1]`, `f ~ U(0, 2]`.
pub fn init_rates<R: Rng + ?Sized>(rng: &mut R) -> Rates {
    let cr = CR_MAX * unit_open_closed(rng);
    let f = F_MAX * unit_open_closed(rng);
    Rates { cr, f }
}

/// The unclamped lognormal step `mu * exp(z)` applied to both rates.
pub fn perturb_rates(parent: Rates, z_cr: f64, z_f: f64) -> (f64, f64) {
    (parent.cr * z_cr.exp(), parent.f * z_f.exp())
}

/// Lognormal self-adaptation. Draws `z_cr` then `z_f` from N(0, 1) and
/// clamps the result back into the rate box.
pub fn mutate_rates<R: Rng + ?Sized>(parent: Rates, rng: &mut R) -> Rates {
    let z_cr: f64 = rng.sample(StandardNormal);
    let z_f: f64 = rng.sample(StandardNormal);
    let (cr, f) = perturb_rates(parent, z_cr, z_f);
    Rates::clamped(cr, f)
}

/// `v = r3 + f * (r1 - r2)`, clamped per gene into `[0, cap]`.
pub fn donor_vector(r1: &Genome, r2: &Genome, r3: &Genome, f: f64, bounds: &GeneBounds) -> Genome {
    debug_assert!(r1.len() == bounds.len() && r2.len() == r1.len() && r3.len() == r1.len());
    r1.iter()
        .zip(r2.iter())
        .zip(r3.iter())
        .enumerate()
        .map(|(i, ((a, b), base))| bounds.clamp(i, base + f * (a - b)))
        .collect::<Vec<_>>()
        .into()
}

/// Binomial crossover with explicit randomness: gene `i` comes from the
/// donor when `i == forced` or `uniforms[i] < cr`.
pub fn binomial_crossover_with(parent: &Genome, donor: &Genome, cr: f64, forced: usize, uniforms: &[f64]) -> Genome {
    assert_eq!(parent.len(), donor.len());
    assert_eq!(uniforms.len(), parent.len());
    assert!(forced < parent.len());
    parent
        .iter()
        .zip(donor.iter())
        .zip(uniforms)
        .enumerate()
        .map(|(i, ((&p, &d), &u))| if i == forced || u < cr { d } else { p })
        .collect::<Vec<_>>()
        .into()
}

/// Binomial crossover. Draws the forced index first, then one `U[0, 1)`
/// per gene in index order.
pub fn binomial_crossover<R: Rng + ?Sized>(parent: &Genome, donor: &Genome, cr: f64, rng: &mut R) -> Genome {
    let n = parent.len();
    let forced = rng.random_range(0..n);
    let uniforms: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    binomial_crossover_with(parent, donor, cr, forced, &uniforms)
}

/// Three indices, distinct from each other and from `parent`, uniform over
/// the rest of a population of size `n` (requires `n >= 4`).
pub fn pick_donors<R: Rng + ?Sized>(n: usize, parent: usize, rng: &mut R) -> [usize; 3] {
    assert!(n >= 4, "DE/rand/1 needs at least four members");
    let mut picked = [usize::MAX; 3];
    let mut k = 0;
    while k < 3 {
        let c = rng.random_range(0..n);
        if c != parent && !picked[..k].contains(&c) {
            picked[k] = c;
            k += 1;
        }
    }
    picked
}

/// Greedy one-to-one replacement. The child wins only on strictly greater
/// fitness; a winning child starts with a zero restart counter.
pub fn select(parent: Individual, child: Individual) -> (Individual, bool) {
    if child.fitness > parent.fitness {
        (Individual { restart_counter: 0, ..child }, true)
    } else {
        (parent, false)
    }
}

/// Uniform genome on `(0, upper_i]` per gene.
pub fn init_genome<R: Rng + ?Sized>(bounds: &GeneBounds, rng: &mut R) -> Genome {
    (0..bounds.len()).map(|i| bounds.init_upper(i) * unit_open_closed(rng)).collect::<Vec<_>>().into()
}
