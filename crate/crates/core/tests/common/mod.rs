//! Seeded diagram suites shared by the integration tests.

#![allow(dead_code)]

use arcflip_core::braid::random_braid_link;
use arcflip_core::labeling::self_crossings;
use arcflip_core::LinkDiagram;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` random connected braid closures whose base diagram passes
/// `accept`, each re-dealt into a random over/under state. One seed, one
/// suite, byte for byte.
pub fn random_suite(
    seed: u64,
    count: usize,
    accept: impl Fn(&LinkDiagram) -> bool,
) -> Vec<LinkDiagram> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let d = random_braid_link(&mut r, 100_000, &accept).expect("suite generator ran dry");
            random_state(&mut r, &d)
        })
        .collect()
}

/// A uniformly random over/under state over the same shadow.
pub fn random_state<R: Rng>(r: &mut R, d: &LinkDiagram) -> LinkDiagram {
    let flips: Vec<usize> = (0..d.crossing_count()).filter(|_| r.random_bool(0.5)).collect();
    d.toggled(&flips)
}

/// True when no component crosses itself. A property of the shadow alone, so
/// it survives `random_state`.
pub fn is_self_free(d: &LinkDiagram) -> bool {
    (0..d.component_count()).all(|k| self_crossings(d, k).is_empty())
}
