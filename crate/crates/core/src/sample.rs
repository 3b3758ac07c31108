//! Seeded random group-ring elements and multipliers for property sweeps.

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::{Element, Group};
use crate::multiplier::Multiplier;
use crate::ring::GroupRingElement;

/// The generator used by every seeded sweep.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_coeff<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Between 1 and `max_terms` terms on points drawn from `pool`, with real and
/// imaginary parts uniform in `[-1, 1)`.
pub fn random_element<R: Rng>(
    g: Group,
    pool: &[Element],
    rng: &mut R,
    max_terms: usize,
) -> GroupRingElement {
    assert!(!pool.is_empty() && max_terms > 0);
    let count = rng.random_range(1..=max_terms);
    let terms: Vec<(Element, Complex64)> = (0..count)
        .map(|_| (pool.choose(rng).expect("pool is nonempty").clone(), random_coeff(rng)))
        .collect();
    GroupRingElement::from_terms(g, terms).expect("pool elements belong to g")
}

/// A table multiplier with up to `max_terms` values drawn like
/// [`random_element`].
pub fn random_table<R: Rng>(
    g: Group,
    pool: &[Element],
    rng: &mut R,
    max_terms: usize,
) -> Multiplier {
    let f = random_element(g, pool, rng, max_terms);
    Multiplier::table(&g, f.terms().map(|(x, c)| (x.clone(), *c))).expect("valid elements")
}
