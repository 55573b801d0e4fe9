//! Seeded semi-synthetic instance generation.
//!
//! Randomness comes from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Bounded draws use rejection
//! sampling on the raw 64-bit output: with `t = (2^64 - k) mod k`, outputs
//! below `t` are discarded and the result is `x mod k`. Draw order:
//!
//! 1. roster (only when none is supplied): `round(n * share_one)` students of
//!    category One followed by the rest, shuffled by Fisher-Yates
//!    (`i = n-1..1`, swap `i` with `draw(i + 1)`);
//! 2. wishes, student by student: a partial Fisher-Yates over `[1..m]`, where
//!    wish `p` swaps position `p` with `p + draw(m - p)`;
//! 3. priorities, topic by topic: the topic's choosers in id order are
//!    shuffled as in step 1 and the `q`-th (0-based) receives `(c - q) / c`.

use std::io::Write;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::dataset::write_dataset;
use crate::error::{Error, Result};
use crate::model::{Category, DenseMatrix, Instance, Params, PriorityMatrix, Student, WishMatrix};
use crate::welfare::build_interest_matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub m: usize,
    pub h: usize,
    pub seed: u64,
    /// Shares of categories Zero and One; must sum to 1.
    pub proportions: [f64; 2],
}

impl GeneratorConfig {
    /// Student performance, Mathematics: 395 students (F 208, M 187), 200 topics.
    pub fn mathematics(seed: u64) -> Self {
        GeneratorConfig {
            n: 395,
            m: 200,
            h: 3,
            seed,
            proportions: [187.0 / 395.0, 208.0 / 395.0],
        }
    }

    /// Student performance, Portuguese: 649 students (F 383, M 266), 325 topics.
    pub fn portuguese(seed: u64) -> Self {
        GeneratorConfig {
            n: 649,
            m: 325,
            h: 3,
            seed,
            proportions: [266.0 / 649.0, 383.0 / 649.0],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.h == 0 || self.h > self.m {
            return Err(Error::Config(format!(
                "need 1 <= h <= m, got h = {}, m = {}",
                self.h, self.m
            )));
        }
        if self.n == 0 {
            return Err(Error::NoStudents);
        }
        let [a, b] = self.proportions;
        if a < 0.0 || b < 0.0 || (a + b - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "proportions must be non-negative and sum to 1, got {a} and {b}"
            )));
        }
        Ok(())
    }
}

struct Draws(Xoshiro256PlusPlus);

impl Draws {
    fn new(seed: u64) -> Self {
        Draws(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform in `0..k`.
    fn below(&mut self, k: usize) -> usize {
        let k = k as u64;
        let threshold = k.wrapping_neg() % k;
        loop {
            let x = self.0.next_u64();
            if x >= threshold {
                return (x % k) as usize;
            }
        }
    }

    fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Generates wishes and per-topic priorities for a roster. When `roster` is
/// `None`, one is drawn from `config.proportions`; otherwise its length must
/// equal `config.n`.
pub fn generate_semisynthetic(
    roster: Option<&[Category]>,
    config: &GeneratorConfig,
    params: Params,
) -> Result<Instance> {
    config.validate()?;
    let mut rng = Draws::new(config.seed);
    let categories: Vec<Category> = match roster {
        Some(r) if r.len() != config.n => {
            return Err(Error::Config(format!(
                "roster has {} students but n = {}",
                r.len(),
                config.n
            )))
        }
        Some(r) => r.to_vec(),
        None => {
            let ones = (config.n as f64 * config.proportions[1]).round() as usize;
            let mut cats = vec![Category::Zero; config.n - ones.min(config.n)];
            cats.resize(config.n, Category::One);
            rng.shuffle(&mut cats);
            cats
        }
    };

    let (n, m, h) = (config.n, config.m, config.h);
    let mut rows = Vec::with_capacity(n);
    let mut pool: Vec<usize> = Vec::with_capacity(m);
    for _ in 0..n {
        pool.clear();
        pool.extend(1..=m);
        for p in 0..h {
            let j = p + rng.below(m - p);
            pool.swap(p, j);
        }
        rows.push(pool[..h].to_vec());
    }
    let wishes = WishMatrix::new(rows);

    let mut choosers: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (s, row) in wishes.rows() {
        for &t in row {
            choosers[t - 1].push(s);
        }
    }
    let mut w = DenseMatrix::zeros(n, m);
    for (t, list) in choosers.iter_mut().enumerate() {
        rng.shuffle(list);
        let c = list.len() as f64;
        for (q, &s) in list.iter().enumerate() {
            w.set(s, t + 1, (c - q as f64) / c);
        }
    }

    let students = categories
        .into_iter()
        .enumerate()
        .map(|(i, c)| Student::new(i + 1, c, None))
        .collect();
    let interest = build_interest_matrix(&wishes, h, m)?;
    Instance::new(students, m, wishes, interest, PriorityMatrix(w), params)
}

/// Writes a generated instance with its generator settings in the header.
pub fn write_semisynthetic<W: Write>(
    instance: &Instance,
    config: &GeneratorConfig,
    writer: W,
) -> Result<()> {
    let comment = vec![
        "semi-synthetic grouping instance".to_string(),
        format!(
            "generator=xoshiro256++ seed={} n={} m={} h={} proportions={},{}",
            config.seed, config.n, config.m, config.h, config.proportions[0], config.proportions[1]
        ),
    ];
    write_dataset(instance, writer, &comment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{read_dataset, DatasetSchema};
    use crate::model::validate_instance;
    use std::collections::BTreeSet;

    #[test]
    fn mathematics_shape() {
        let cfg = GeneratorConfig::mathematics(7);
        let inst = generate_semisynthetic(None, &cfg, Params::default()).unwrap();
        assert_eq!((inst.n(), inst.topics(), inst.h()), (395, 200, 3));
        for (_, row) in inst.wishes().rows() {
            let set: BTreeSet<_> = row.iter().collect();
            assert_eq!(set.len(), 3);
            assert!(row.iter().all(|&t| (1..=200).contains(&t)));
        }
        let ones = inst
            .students()
            .iter()
            .filter(|s| s.category == Category::One)
            .count();
        assert_eq!(ones, 208);
        assert!(validate_instance(&inst).is_pass());
    }

    #[test]
    fn portuguese_shape() {
        let cfg = GeneratorConfig::portuguese(11);
        let inst = generate_semisynthetic(None, &cfg, Params::default()).unwrap();
        assert_eq!((inst.n(), inst.topics()), (649, 325));
        assert!(inst
            .wishes()
            .rows()
            .all(|(_, r)| r.iter().collect::<BTreeSet<_>>().len() == 3
                && r.iter().all(|&t| t <= 325)));
        let ones = inst
            .students()
            .iter()
            .filter(|s| s.category == Category::One)
            .count();
        assert_eq!(ones, 383);
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = GeneratorConfig {
            n: 40,
            m: 12,
            h: 3,
            seed: 99,
            proportions: [0.5, 0.5],
        };
        let render = |cfg: &GeneratorConfig| {
            let inst = generate_semisynthetic(None, cfg, Params::default()).unwrap();
            let mut buf = Vec::new();
            write_semisynthetic(&inst, cfg, &mut buf).unwrap();
            buf
        };
        assert_eq!(render(&cfg), render(&cfg));
        let other = GeneratorConfig {
            seed: 100,
            ..cfg.clone()
        };
        assert_ne!(render(&cfg), render(&other));
    }

    #[test]
    fn persisted_file_reloads_identically() {
        let cfg = GeneratorConfig {
            n: 30,
            m: 10,
            h: 3,
            seed: 5,
            proportions: [0.4, 0.6],
        };
        let inst = generate_semisynthetic(None, &cfg, Params::default()).unwrap();
        let mut buf = Vec::new();
        write_semisynthetic(&inst, &cfg, &mut buf).unwrap();
        let back =
            read_dataset(buf.as_slice(), &DatasetSchema::default(), Params::default()).unwrap();
        assert!(back.report.is_pass());
        assert_eq!(back.instance, inst);
    }

    #[test]
    fn supplied_roster_is_kept() {
        let roster = [Category::One, Category::Zero, Category::One];
        let cfg = GeneratorConfig {
            n: 3,
            m: 4,
            h: 2,
            seed: 1,
            proportions: [0.5, 0.5],
        };
        let inst = generate_semisynthetic(Some(&roster), &cfg, Params::default()).unwrap();
        let cats: Vec<Category> = inst.students().iter().map(|s| s.category).collect();
        assert_eq!(cats, roster);
    }

    #[test]
    fn rejects_more_wishes_than_topics() {
        let cfg = GeneratorConfig {
            n: 3,
            m: 2,
            h: 3,
            seed: 1,
            proportions: [0.5, 0.5],
        };
        assert!(matches!(
            generate_semisynthetic(None, &cfg, Params::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn draws_stay_in_range() {
        let mut rng = Draws::new(3);
        let mut seen = [false; 7];
        for _ in 0..500 {
            seen[rng.below(7)] = true;
        }
        assert!(seen.iter().all(|&x| x));
    }
}
