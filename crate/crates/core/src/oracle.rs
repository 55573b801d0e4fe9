//! Exhaustive search over every student-to-topic assignment. Only usable on
//! toy instances; serves as ground truth for the solvers.

use crate::error::{Error, Result};
use crate::metrics::{balance_of_counts, MetricsReport};
use crate::model::{ensure_feasible, Grouping, Instance, TopicId};
use crate::solver::Solution;

pub const DEFAULT_MAX_STATES: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub solution: Solution,
    pub optimal_nash: f64,
}

struct Search<'a> {
    instance: &'a Instance,
    assignment: Vec<TopicId>,
    sizes: Vec<usize>,
    best: Option<(f64, f64, Vec<TopicId>)>,
}

impl Search<'_> {
    fn descend(&mut self, student: usize) {
        let n = self.instance.n();
        let bounds = self.instance.bounds();
        if student == n {
            self.evaluate();
            return;
        }
        for t in 1..=self.instance.topics() {
            if self.sizes[t - 1] == bounds.upper {
                continue;
            }
            self.sizes[t - 1] += 1;
            self.assignment[student] = t;
            self.descend(student + 1);
            self.sizes[t - 1] -= 1;
        }
    }

    fn evaluate(&mut self) {
        let bounds = self.instance.bounds();
        if self.sizes.iter().any(|&s| s > 0 && s < bounds.lower) {
            return;
        }
        let m = self.instance.topics();
        let mut sums = vec![0.0; m];
        let mut counts = vec![[0usize; 2]; m];
        for (i, &t) in self.assignment.iter().enumerate() {
            sums[t - 1] += self.instance.welfare().get(i + 1, t);
            counts[t - 1][self.instance.category(i + 1).index()] += 1;
        }
        let mut nash = 1.0;
        let mut balance = f64::INFINITY;
        for t in 0..m {
            if self.sizes[t] > 0 {
                nash *= 1.0 + sums[t];
                balance = balance.min(balance_of_counts(counts[t][0], counts[t][1]));
            }
        }
        let improves = match &self.best {
            None => true,
            Some((bn, bb, _)) => {
                let tol = 1e-12 * bn.max(1.0);
                nash > bn + tol || (nash >= bn - tol && balance > bb + 1e-12)
            }
        };
        if improves {
            self.best = Some((nash, balance, self.assignment.clone()));
        }
    }
}

/// Enumerates all `m^n` assignments (pruning groups above the upper bound),
/// keeps those whose non-empty groups respect the bounds, and returns one
/// maximising the Nash product; ties go to the higher balance, then to the
/// lexicographically smallest assignment vector.
pub fn oracle_solve(instance: &Instance, max_states: u64) -> Result<OracleSolution> {
    ensure_feasible(instance)?;
    let states = (instance.topics() as u64).checked_pow(instance.n() as u32);
    match states {
        Some(s) if s <= max_states => {}
        _ => {
            return Err(Error::Guard(format!(
                "oracle refused: {}^{} states exceed the budget of {max_states}",
                instance.topics(),
                instance.n()
            )))
        }
    }
    let mut search = Search {
        instance,
        assignment: vec![0; instance.n()],
        sizes: vec![0; instance.topics()],
        best: None,
    };
    search.descend(0);
    let (optimal_nash, _, assignment) = search.best.ok_or(Error::Infeasible {
        students: instance.n(),
        topics: instance.topics(),
        bounds: instance.bounds(),
    })?;
    let mut groups: Vec<(TopicId, Vec<usize>)> =
        (1..=instance.topics()).map(|t| (t, Vec::new())).collect();
    for (i, &t) in assignment.iter().enumerate() {
        groups[t - 1].1.push(i + 1);
    }
    let grouping = Grouping::from_groups(groups)?;
    let metrics = MetricsReport::compute(&grouping, instance)?;
    Ok(OracleSolution {
        solution: Solution { grouping, metrics },
        optimal_nash,
    })
}
