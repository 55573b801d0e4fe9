//! Group adjustment: turns a partial grouping into a complete partition with
//! every group size inside the bounds.
//!
//! Runs in three phases:
//! 1. unassigned students join existing groups still below the lower bound,
//!    wished groups first;
//! 2. remaining students go to the topic most wished among them that still
//!    has room, opening new groups as needed;
//! 3. for sizes `1..lower`, undersized groups are disbanded cheapest first and
//!    their members re-placed. When the other groups lack room for them the
//!    group is instead topped up with members of groups above the lower bound.

use std::cmp::Ordering;

use crate::board::{cmp_welfare, Board};
use crate::error::{Error, Result};
use crate::model::{ensure_feasible, partition_defect, Grouping, Instance, StudentId, TopicId};

/// Completes `partial` into an in-bounds partition of all students.
pub fn group_adjustment(
    partial: &Grouping,
    instance: &Instance,
    balance_tiebreak: bool,
) -> Result<Grouping> {
    ensure_feasible(instance)?;
    partial.check_against(instance)?;
    let mut board = Board::from_grouping(instance, partial);
    adjust(&mut board, balance_tiebreak)?;
    let grouping = board.into_grouping();
    match partition_defect(&grouping, instance) {
        None => Ok(grouping),
        Some(defect) => Err(Error::Guard(format!("adjustment left a defect: {defect}"))),
    }
}

pub(crate) fn adjust(board: &mut Board<'_>, balance_tiebreak: bool) -> Result<()> {
    trim_oversized(board);
    fill_undersized(board, balance_tiebreak);
    place_remaining(board, balance_tiebreak)?;
    resolve_small_groups(board, balance_tiebreak);
    Ok(())
}

/// Drops the lowest-welfare members of any group above the upper bound.
fn trim_oversized(board: &mut Board<'_>) {
    let upper = board.instance.bounds().upper;
    let topics: Vec<TopicId> = board.open_topics().collect();
    for t in topics {
        while board.size(t) > upper {
            let worst = board
                .members(t)
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    cmp_welfare(board.welfare(a, t), board.welfare(b, t)).then_with(|| b.cmp(&a))
                })
                .expect("non-empty group");
            board.remove(worst);
        }
    }
}

fn prefer_group(
    board: &Board<'_>,
    student: StudentId,
    a: TopicId,
    b: TopicId,
    balance_tiebreak: bool,
) -> Ordering {
    // Less means `a` is preferred: smaller group, then better balance, then lower index.
    board
        .size(a)
        .cmp(&board.size(b))
        .then_with(|| {
            if balance_tiebreak {
                board
                    .balance_with(b, student)
                    .total_cmp(&board.balance_with(a, student))
            } else {
                Ordering::Equal
            }
        })
        .then(a.cmp(&b))
}

fn fill_undersized(board: &mut Board<'_>, balance_tiebreak: bool) {
    let lower = board.instance.bounds().lower;
    for s in board.unassigned() {
        let wished = board
            .instance
            .wishes()
            .row(s)
            .iter()
            .copied()
            .find(|&t| (1..lower).contains(&board.size(t)));
        let target = wished.or_else(|| {
            board
                .open_topics()
                .filter(|&t| board.size(t) < lower)
                .min_by(|&a, &b| prefer_group(board, s, a, b, balance_tiebreak))
        });
        if let Some(t) = target {
            board.assign(s, t);
        }
    }
}

fn place_remaining(board: &mut Board<'_>, balance_tiebreak: bool) -> Result<()> {
    let instance = board.instance;
    let upper = instance.bounds().upper;
    let m = instance.topics();
    let guard = instance.n() * m + 1;
    let mut rounds = 0usize;
    loop {
        let mut unassigned = board.unassigned();
        if unassigned.is_empty() {
            return Ok(());
        }
        rounds += 1;
        if rounds > guard {
            return Err(Error::Guard(format!(
                "placement did not terminate after {guard} rounds"
            )));
        }

        let mut demand = vec![0usize; m];
        for &s in &unassigned {
            for &t in instance.wishes().row(s) {
                demand[t - 1] += 1;
            }
        }
        let prevalent = (1..=m)
            .filter(|&t| demand[t - 1] > 0 && board.size(t) < upper)
            .max_by(|&a, &b| demand[a - 1].cmp(&demand[b - 1]).then(b.cmp(&a)));

        let (topic, mut candidates) = match prevalent {
            Some(t) => {
                let wishers: Vec<StudentId> = unassigned
                    .iter()
                    .copied()
                    .filter(|&s| instance.wishes().wishes(s, t))
                    .collect();
                (t, wishers)
            }
            None => {
                let fresh = (1..=m).find(|&t| board.size(t) == 0);
                let t = match fresh {
                    Some(t) => t,
                    None => {
                        let probe = unassigned[0];
                        board
                            .open_topics()
                            .filter(|&t| board.size(t) < upper)
                            .min_by(|&a, &b| prefer_group(board, probe, a, b, balance_tiebreak))
                            .ok_or_else(|| {
                                Error::Guard("every group is at the upper bound".into())
                            })?
                    }
                };
                (t, std::mem::take(&mut unassigned))
            }
        };
        while board.size(topic) < upper {
            let Some(idx) = board.best_candidate(topic, &candidates, balance_tiebreak) else {
                break;
            };
            let s = candidates.swap_remove(idx);
            board.assign(s, topic);
        }
    }
}

fn resolve_small_groups(board: &mut Board<'_>, balance_tiebreak: bool) {
    let bounds = board.instance.bounds();
    for n_items in 1..bounds.lower {
        let mut targets: Vec<(f64, TopicId)> = board
            .open_topics()
            .filter(|&t| board.size(t) == n_items)
            .map(|t| (board.welfare_sum(t), t))
            .collect();
        targets.sort_by(|a, b| cmp_welfare(a.0, b.0).then(a.1.cmp(&b.1)));

        for (_, t) in targets {
            if board.size(t) != n_items {
                continue;
            }
            let room: usize = board
                .open_topics()
                .filter(|&u| u != t)
                .map(|u| bounds.upper - board.size(u))
                .sum();
            if room >= n_items {
                let freed = board.disband(t);
                for s in freed {
                    replace_freed(board, s, balance_tiebreak);
                }
            } else {
                top_up(board, t, balance_tiebreak);
            }
        }
    }
}

fn replace_freed(board: &mut Board<'_>, s: StudentId, balance_tiebreak: bool) {
    let upper = board.instance.bounds().upper;
    let wished = board
        .instance
        .wishes()
        .row(s)
        .iter()
        .copied()
        .find(|&t| (1..upper).contains(&board.size(t)));
    let target = wished
        .or_else(|| {
            board
                .open_topics()
                .filter(|&t| board.size(t) < upper)
                .min_by(|&a, &b| prefer_group(board, s, a, b, balance_tiebreak))
        })
        .expect("room was checked before disbanding");
    board.assign(s, target);
}

/// Moves students from groups above the lower bound into `topic` until it
/// reaches the lower bound, choosing the move with the largest welfare gain.
fn top_up(board: &mut Board<'_>, topic: TopicId, balance_tiebreak: bool) {
    let lower = board.instance.bounds().lower;
    while board.size(topic) < lower {
        let donors: Vec<TopicId> = board
            .open_topics()
            .filter(|&u| u != topic && board.size(u) > lower)
            .collect();
        let mut best: Option<(StudentId, TopicId)> = None;
        for &u in &donors {
            for &s in board.members(u) {
                let better = match best {
                    None => true,
                    Some((b, bu)) => {
                        compare_moves(board, topic, (s, u), (b, bu), balance_tiebreak)
                            == Ordering::Greater
                    }
                };
                if better {
                    best = Some((s, u));
                }
            }
        }
        let Some((s, _)) = best else {
            // No donor left; the final partition check reports the defect.
            return;
        };
        board.remove(s);
        board.assign(s, topic);
    }
}

fn compare_moves(
    board: &Board<'_>,
    topic: TopicId,
    (a, au): (StudentId, TopicId),
    (b, bu): (StudentId, TopicId),
    balance_tiebreak: bool,
) -> Ordering {
    let gain = |s: StudentId, u: TopicId| board.welfare(s, topic) - board.welfare(s, u);
    cmp_welfare(gain(a, au), gain(b, bu))
        .then_with(|| {
            if balance_tiebreak {
                let score = |s: StudentId, u: TopicId| {
                    board
                        .balance_with(topic, s)
                        .min(board.balance_without(u, s))
                };
                score(a, au).total_cmp(&score(b, bu))
            } else {
                Ordering::Equal
            }
        })
        .then_with(|| {
            board
                .instance
                .registration_key(b)
                .cmp(&board.instance.registration_key(a))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_complete_partition, Bounds, Category, Params, Student, WishMatrix};

    fn instance(wishes: Vec<Vec<usize>>, topics: usize, lower: usize, upper: usize) -> Instance {
        let students = (1..=wishes.len())
            .map(|i| {
                let c = if i % 2 == 0 {
                    Category::One
                } else {
                    Category::Zero
                };
                Student::new(i, c, Some(i as i64))
            })
            .collect();
        let params = Params {
            bounds: Bounds::new(lower, upper).unwrap(),
            ..Params::default()
        };
        Instance::from_registration(students, topics, WishMatrix::new(wishes), params).unwrap()
    }

    #[test]
    fn leftover_joins_undersized_group() {
        let inst = instance(
            vec![vec![1, 2], vec![1, 3], vec![2, 1], vec![2, 3], vec![3, 1]],
            3,
            3,
            4,
        );
        // group 1 at size lower-1, group 2 full at lower; student 5 unassigned
        let partial = Grouping::from_groups([(1, vec![1, 2]), (2, vec![3, 4])]).unwrap();
        let mut board = Board::from_grouping(&inst, &partial);
        fill_undersized(&mut board, true);
        assert_eq!(board.topic_of(5), Some(1));
    }

    #[test]
    fn prevalent_topic_is_opened() {
        let inst = instance(
            vec![vec![1, 2], vec![1, 2], vec![7, 3], vec![7, 4], vec![5, 6]],
            7,
            2,
            3,
        );
        let partial = Grouping::from_groups([(1, vec![1, 2])]).unwrap();
        let mut board = Board::from_grouping(&inst, &partial);
        fill_undersized(&mut board, true);
        place_remaining(&mut board, true).unwrap();
        assert_eq!(board.topic_of(3), Some(7));
        assert_eq!(board.topic_of(4), Some(7));
    }

    #[test]
    fn singleton_group_is_disbanded() {
        let inst = instance(vec![vec![1, 2], vec![1, 2], vec![2, 1]], 2, 2, 3);
        let partial = Grouping::from_groups([(1, vec![1, 2]), (2, vec![3])]).unwrap();
        let out = group_adjustment(&partial, &inst, true).unwrap();
        assert!(is_complete_partition(&out, &inst));
        assert_eq!(out.group(1), Some(&[1, 2, 3][..]));
        assert_eq!(out.group(2), None);
    }

    #[test]
    fn full_neighbours_force_top_up() {
        // 7 students, bounds [2,3]: groups 3 + 3 + 1 cannot absorb the singleton
        let inst = instance(
            vec![
                vec![1, 3],
                vec![1, 3],
                vec![1, 2],
                vec![2, 3],
                vec![2, 3],
                vec![2, 1],
                vec![3, 1],
            ],
            3,
            2,
            3,
        );
        let partial =
            Grouping::from_groups([(1, vec![1, 2, 3]), (2, vec![4, 5, 6]), (3, vec![7])]).unwrap();
        let out = group_adjustment(&partial, &inst, true).unwrap();
        assert!(is_complete_partition(&out, &inst));
        assert_eq!(out.len(), 3);
        // a topic-3 wisher moved over
        assert!(out.group(3).unwrap().len() == 2);
    }

    #[test]
    fn oversized_groups_are_trimmed() {
        let inst = instance(vec![vec![1, 2]; 5], 2, 2, 3);
        let partial = Grouping::from_groups([(1, vec![1, 2, 3, 4, 5])]).unwrap();
        let out = group_adjustment(&partial, &inst, false).unwrap();
        assert!(is_complete_partition(&out, &inst));
    }

    #[test]
    fn infeasible_input_is_rejected() {
        let inst = instance(vec![vec![1], vec![2], vec![1]], 2, 4, 5);
        assert!(matches!(
            group_adjustment(&Grouping::new(), &inst, true),
            Err(Error::Infeasible { .. })
        ));
    }
}
