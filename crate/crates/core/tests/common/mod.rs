#![allow(dead_code)]

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sts_core::model::{vertex_count, TreeSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spec with at most `max_levels` branch levels, positions below
/// `max_position` and factors in `2..=max_k`.
pub fn random_spec(
    rng: &mut impl Rng,
    max_levels: usize,
    max_position: u64,
    max_k: u64,
) -> TreeSpec {
    let levels = rng.gen_range(1..=max_levels.min(max_position as usize));
    let mut positions: Vec<u64> = sample(rng, max_position as usize, levels)
        .into_iter()
        .map(|p| p as u64 + 1)
        .collect();
    positions.sort_unstable();
    let factors = (0..levels).map(|_| rng.gen_range(2..=max_k)).collect();
    TreeSpec::new(positions, factors).unwrap()
}

/// `(spec, depth)` with at most 4 branch levels, `k <= 5`, `depth <= 12`, at
/// least one branching inside the tree and at most `max_vertices` vertices.
pub fn small_case(rng: &mut impl Rng, max_vertices: u64) -> (TreeSpec, usize) {
    loop {
        let spec = random_spec(rng, 4, 7, 5);
        let mut depth = rng.gen_range(6..=12u64);
        while vertex_count(&spec, depth).unwrap() > max_vertices {
            depth -= 1;
        }
        if depth >= spec.positions()[0] {
            return (spec, depth as usize);
        }
    }
}

/// The fixed set of 50 cases shared by several acceptance criteria.
pub fn acceptance_cases() -> Vec<(TreeSpec, usize)> {
    let mut r = rng(0x5eed_0001);
    (0..50).map(|_| small_case(&mut r, 2000)).collect()
}
