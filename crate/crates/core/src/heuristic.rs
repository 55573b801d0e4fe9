//! Preference-first greedy assignment followed by group adjustment.

use serde::{Deserialize, Serialize};

use crate::adjust::adjust;
use crate::board::Board;
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::model::{ensure_feasible, partition_defect, Grouping, Instance, StudentId};
use crate::solver::Solution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    /// Break otherwise-equal choices in favour of the more balanced group.
    pub balance_tiebreak: bool,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            balance_tiebreak: true,
        }
    }
}

/// Step one of the heuristic. For each preference rank in turn, every topic
/// admits its still-unassigned students holding it at that rank, highest
/// welfare first, while the group is below the lower bound.
pub fn initial_assignment(instance: &Instance, config: &HeuristicConfig) -> Grouping {
    let mut board = Board::new(instance);
    assign_by_preference(&mut board, config);
    board.into_grouping()
}

fn assign_by_preference(board: &mut Board<'_>, config: &HeuristicConfig) {
    let instance = board.instance;
    let lower = instance.bounds().lower;
    let m = instance.topics();
    for rank in 0..instance.h() {
        let mut buckets: Vec<Vec<StudentId>> = vec![Vec::new(); m];
        for (s, row) in instance.wishes().rows() {
            if let Some(&t) = row.get(rank) {
                buckets[t - 1].push(s);
            }
        }
        for (t, bucket) in buckets.into_iter().enumerate() {
            let topic = t + 1;
            let mut candidates: Vec<StudentId> = bucket
                .into_iter()
                .filter(|&s| !board.is_assigned(s))
                .collect();
            while board.size(topic) < lower {
                let Some(idx) = board.best_candidate(topic, &candidates, config.balance_tiebreak)
                else {
                    break;
                };
                let s = candidates.swap_remove(idx);
                board.assign(s, topic);
            }
        }
    }
}

/// Runs the full heuristic and returns a complete in-bounds partition.
pub fn heuristic_solve(instance: &Instance, config: &HeuristicConfig) -> Result<Solution> {
    ensure_feasible(instance)?;
    let mut board = Board::new(instance);
    assign_by_preference(&mut board, config);
    adjust(&mut board, config.balance_tiebreak)?;
    let grouping = board.into_grouping();
    if let Some(defect) = partition_defect(&grouping, instance) {
        return Err(Error::Guard(format!(
            "heuristic produced a defect: {defect}"
        )));
    }
    let metrics = MetricsReport::compute(&grouping, instance)?;
    Ok(Solution { grouping, metrics })
}
