#![allow(dead_code)]

use std::path::PathBuf;

use mfc_grouping::{
    check_feasibility, generate_semisynthetic, Bounds, GeneratorConfig, Instance, Params,
};
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/data_science.csv")
}

pub struct TestRng(Xoshiro256PlusPlus);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform in `lo..=hi` (modulo bias is irrelevant here).
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn next(&mut self) -> u64 {
        self.0.next_u64()
    }
}

pub fn generated(n: usize, m: usize, h: usize, seed: u64, bounds: Bounds) -> Instance {
    let cfg = GeneratorConfig {
        n,
        m,
        h,
        seed,
        proportions: [0.5, 0.5],
    };
    let params = Params {
        bounds,
        ..Params::default()
    };
    generate_semisynthetic(None, &cfg, params).unwrap()
}

/// Draws random (n, m, C^l) until the combination is feasible with
/// `C^u = C^l + 1`, then generates the instance.
pub fn random_feasible(
    rng: &mut TestRng,
    n: (usize, usize),
    m: (usize, usize),
    h: usize,
    cl: (usize, usize),
) -> Instance {
    loop {
        let nn = rng.range(n.0, n.1);
        let mm = rng.range(m.0.max(h), m.1);
        let lower = rng.range(cl.0, cl.1);
        let bounds = Bounds::new(lower, lower + 1).unwrap();
        if check_feasibility(nn, bounds, mm).is_feasible() {
            return generated(nn, mm, h, rng.next(), bounds);
        }
    }
}
