//! Fixtures shared by the criterion benches.

use advseg_core::harness::{random_interval, LengthMix};
use advseg_core::{Interval, Preset, Reservation, Tree, TreeConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tree shapes the benches sweep over.
pub fn shapes() -> Vec<(String, TreeConfig)> {
    let mut shapes: Vec<(String, TreeConfig)> = [10usize, 14, 18]
        .iter()
        .map(|&lg| (format!("binary-2^{lg}"), TreeConfig::binary(lg + 1).unwrap()))
        .collect();
    shapes.push((
        Preset::PaperMonth5Min.name().to_string(),
        Preset::PaperMonth5Min.config(0).unwrap(),
    ));
    shapes
}

/// `count` reservations drawn with the default length mix.
pub fn reservations(leaves: u64, count: usize, seed: u64) -> Vec<Reservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Reservation::new(
                random_interval(&mut rng, leaves, &LengthMix::default()),
                rng.random_range(1..=100),
            )
        })
        .collect()
}

pub fn intervals(leaves: u64, count: usize, seed: u64) -> Vec<Interval> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_interval(&mut rng, leaves, &LengthMix::default()))
        .collect()
}

/// Short intervals drifting slowly through the universe, the access
/// pattern a finger helps with.
pub fn local_intervals(leaves: u64, count: usize, seed: u64) -> Vec<Interval> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut center = leaves / 2;
    (0..count)
        .map(|_| {
            center = (center + rng.random_range(0..8)) % leaves;
            let len = rng.random_range(1..=16).min(leaves - center);
            Interval::new(center, center + len).unwrap()
        })
        .collect()
}

/// A tree already holding `fill` random reservations.
pub fn loaded_tree(config: &TreeConfig, fill: usize, seed: u64) -> Tree {
    let mut tree = Tree::new(config.clone()).unwrap();
    for r in reservations(config.leaves(), fill, seed) {
        tree.insert(&r).unwrap();
    }
    tree
}
