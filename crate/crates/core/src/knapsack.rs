//! Per-topic 0/1 knapsack selection of students, followed by the shared
//! group adjustment.
//!
//! Topics are visited in turn; each one takes the subset of still-unassigned
//! students with positive welfare for it that maximises total welfare under a
//! head-count budget. The budget is the lower bound when the number of
//! unassigned students is a multiple of it and the upper bound otherwise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjust::adjust;
use crate::board::{cmp_welfare, Board, TIE_EPS};
use crate::error::{Error, Result};
use crate::metrics::{balance_of_counts, MetricsReport};
use crate::model::{ensure_feasible, partition_defect, Category, Instance, StudentId, TopicId};
use crate::solver::Solution;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnapsackItem {
    pub student: StudentId,
    pub weight: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnapsackSelection {
    /// Positions in the input item slice, ascending.
    pub chosen: Vec<usize>,
    pub total_value: f64,
    pub total_weight: usize,
}

/// Exact 0/1 knapsack by dynamic programming over items x budget.
///
/// Among optimal selections the reconstruction takes each item, in input
/// order, whenever an optimal completion including it exists.
pub fn knapsack_01(items: &[KnapsackItem], budget: usize) -> KnapsackSelection {
    let n = items.len();
    let width = budget + 1;
    // best[i * width + c]: optimum over items i.. with capacity c
    let mut best = vec![0.0f64; (n + 1) * width];
    for i in (0..n).rev() {
        let KnapsackItem { weight, value, .. } = items[i];
        for c in 0..width {
            let skip = best[(i + 1) * width + c];
            let take = if weight <= c {
                value + best[(i + 1) * width + c - weight]
            } else {
                f64::NEG_INFINITY
            };
            best[i * width + c] = skip.max(take);
        }
    }

    let mut chosen = Vec::new();
    let mut c = budget;
    for (i, item) in items.iter().enumerate() {
        if item.weight <= c {
            let take = item.value + best[(i + 1) * width + c - item.weight];
            if take >= best[i * width + c] - tolerance(best[i * width + c]) {
                chosen.push(i);
                c -= item.weight;
            }
        }
    }
    summarize(items, chosen)
}

fn tolerance(x: f64) -> f64 {
    TIE_EPS * x.abs().max(1.0)
}

fn summarize(items: &[KnapsackItem], chosen: Vec<usize>) -> KnapsackSelection {
    KnapsackSelection {
        total_value: chosen.iter().map(|&i| items[i].value).sum(),
        total_weight: chosen.iter().map(|&i| items[i].weight).sum(),
        chosen,
    }
}

/// Unit-weight knapsack that, among maximum-value selections, prefers the
/// one whose protected-attribute balance is highest, then the
/// lexicographically smallest set of positions.
///
/// `categories[i]` is the category of `items[i]`; all weights must be 1.
pub fn knapsack_01_balanced(
    items: &[KnapsackItem],
    categories: &[Category],
    budget: usize,
) -> KnapsackSelection {
    assert_eq!(items.len(), categories.len());
    assert!(
        items.iter().all(|it| it.weight == 1),
        "unit weights required"
    );
    let n = items.len();
    let cap = budget.min(n);
    let dim = cap + 1;
    let idx = |i: usize, c: usize, a: usize| (i * dim + c) * dim + a;
    // g[i][c][a]: best value choosing exactly c items from i.. with a of category One
    let mut g = vec![f64::NEG_INFINITY; (n + 1) * dim * dim];
    g[idx(n, 0, 0)] = 0.0;
    for i in (0..n).rev() {
        let one = usize::from(categories[i] == Category::One);
        for c in 0..dim {
            for a in 0..=c {
                let skip = g[idx(i + 1, c, a)];
                let take = if c >= 1 && a >= one {
                    let rest = g[idx(i + 1, c - 1, a - one)];
                    if rest.is_finite() {
                        items[i].value + rest
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    f64::NEG_INFINITY
                };
                g[idx(i, c, a)] = skip.max(take);
            }
        }
    }

    let optimum = (0..dim)
        .flat_map(|c| (0..=c).map(move |a| (c, a)))
        .map(|(c, a)| g[idx(0, c, a)])
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = tolerance(optimum);
    let optimal: Vec<(usize, usize)> = (0..dim)
        .flat_map(|c| (0..=c).map(move |a| (c, a)))
        .filter(|&(c, a)| g[idx(0, c, a)] >= optimum - tol)
        .collect();
    let best_balance = optimal
        .iter()
        .map(|&(c, a)| balance_of_counts(c - a, a))
        .fold(f64::NEG_INFINITY, f64::max);

    let mut winner: Option<Vec<usize>> = None;
    for &(c, a) in &optimal {
        if balance_of_counts(c - a, a) < best_balance - 1e-12 {
            continue;
        }
        let set = reconstruct(items, categories, &g, idx, (c, a));
        if winner.as_ref().is_none_or(|w| set < *w) {
            winner = Some(set);
        }
    }
    summarize(items, winner.unwrap_or_default())
}

fn reconstruct(
    items: &[KnapsackItem],
    categories: &[Category],
    g: &[f64],
    idx: impl Fn(usize, usize, usize) -> usize,
    (mut c, mut a): (usize, usize),
) -> Vec<usize> {
    let mut set = Vec::with_capacity(c);
    for (i, item) in items.iter().enumerate() {
        if c == 0 {
            break;
        }
        let one = usize::from(categories[i] == Category::One);
        if a < one {
            continue;
        }
        let rest = g[idx(i + 1, c - 1, a - one)];
        let here = g[idx(i, c, a)];
        if rest.is_finite() && item.value + rest >= here - tolerance(here) {
            set.push(i);
            c -= 1;
            a -= one;
        }
    }
    set
}

/// Which count the budget rule tests for divisibility by the lower bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModBasis {
    /// Students still unassigned when the topic is visited.
    #[default]
    Unassigned,
    /// The total number of students.
    Global,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicOrder {
    /// Topics 1..m.
    #[default]
    Index,
    /// Descending total welfare over all students, ties by index.
    Demand,
}

impl FromStr for ModBasis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unassigned" => Ok(ModBasis::Unassigned),
            "global" => Ok(ModBasis::Global),
            other => Err(format!("unknown mod basis {other:?}")),
        }
    }
}

impl FromStr for TopicOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "index" => Ok(TopicOrder::Index),
            "demand" => Ok(TopicOrder::Demand),
            other => Err(format!("unknown topic order {other:?}")),
        }
    }
}

impl fmt::Display for ModBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModBasis::Unassigned => "unassigned",
            ModBasis::Global => "global",
        })
    }
}

impl fmt::Display for TopicOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopicOrder::Index => "index",
            TopicOrder::Demand => "demand",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackConfig {
    pub balance_tiebreak: bool,
    pub mod_basis: ModBasis,
    pub topic_order: TopicOrder,
}

impl Default for KnapsackConfig {
    fn default() -> Self {
        KnapsackConfig {
            balance_tiebreak: true,
            mod_basis: ModBasis::default(),
            topic_order: TopicOrder::default(),
        }
    }
}

fn topic_sequence(instance: &Instance, order: TopicOrder) -> Vec<TopicId> {
    let mut topics: Vec<TopicId> = (1..=instance.topics()).collect();
    if order == TopicOrder::Demand {
        let demand: Vec<f64> = topics
            .iter()
            .map(|&t| {
                (1..=instance.n())
                    .map(|s| instance.welfare().get(s, t))
                    .sum()
            })
            .collect();
        topics.sort_by(|&a, &b| cmp_welfare(demand[b - 1], demand[a - 1]).then(a.cmp(&b)));
    }
    topics
}

fn budget_for(instance: &Instance, unassigned: usize, basis: ModBasis) -> usize {
    let bounds = instance.bounds();
    let count = match basis {
        ModBasis::Unassigned => unassigned,
        ModBasis::Global => instance.n(),
    };
    match count.checked_rem(bounds.lower) {
        Some(0) => bounds.lower,
        _ => bounds.upper,
    }
}

fn select_students(board: &mut Board<'_>, config: &KnapsackConfig) {
    let instance = board.instance;
    for topic in topic_sequence(instance, config.topic_order) {
        let unassigned = board.unassigned();
        if unassigned.is_empty() {
            break;
        }
        let items: Vec<KnapsackItem> = unassigned
            .iter()
            .map(|&s| KnapsackItem {
                student: s,
                weight: 1,
                value: instance.welfare().get(s, topic),
            })
            .filter(|it| it.value > 0.0)
            .collect();
        if items.is_empty() {
            continue;
        }
        let budget = budget_for(instance, unassigned.len(), config.mod_basis);
        let selection = if config.balance_tiebreak {
            let cats: Vec<Category> = items
                .iter()
                .map(|it| instance.category(it.student))
                .collect();
            knapsack_01_balanced(&items, &cats, budget)
        } else {
            knapsack_01(&items, budget)
        };
        for i in selection.chosen {
            board.assign(items[i].student, topic);
        }
    }
}

/// Knapsack selection per topic, then group adjustment.
pub fn knapsack_solve(instance: &Instance, config: &KnapsackConfig) -> Result<Solution> {
    ensure_feasible(instance)?;
    let mut board = Board::new(instance);
    select_students(&mut board, config);
    adjust(&mut board, config.balance_tiebreak)?;
    let grouping = board.into_grouping();
    if let Some(defect) = partition_defect(&grouping, instance) {
        return Err(Error::Guard(format!(
            "knapsack produced a defect: {defect}"
        )));
    }
    let metrics = MetricsReport::compute(&grouping, instance)?;
    Ok(Solution { grouping, metrics })
}

/// The step-one grouping before adjustment, exposed for inspection.
pub fn knapsack_selection_step(
    instance: &Instance,
    config: &KnapsackConfig,
) -> crate::model::Grouping {
    let mut board = Board::new(instance);
    select_students(&mut board, config);
    board.into_grouping()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_complete_partition, Bounds, Params, Student, WishMatrix};
    use proptest::prelude::*;

    fn items(values: &[f64], weights: &[usize]) -> Vec<KnapsackItem> {
        values
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(i, (&value, &weight))| KnapsackItem {
                student: i + 1,
                weight,
                value,
            })
            .collect()
    }

    /// Every subset, checked independently of the DP.
    fn brute_force(items: &[KnapsackItem], budget: usize) -> f64 {
        (0u32..1 << items.len())
            .filter_map(|mask| {
                let (w, v) = items
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold((0, 0.0), |(w, v), (_, it)| (w + it.weight, v + it.value));
                (w <= budget).then_some(v)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn classic_instance() {
        let its = items(&[60.0, 100.0, 120.0], &[10, 20, 30]);
        assert_eq!(brute_force(&its, 50), 220.0);
        let sel = knapsack_01(&its, 50);
        assert_eq!(sel.total_value, 220.0);
        assert_eq!(sel.chosen, vec![1, 2]);
        assert_eq!(sel.total_weight, 50);
    }

    #[test]
    fn zero_budget_selects_nothing() {
        let its = items(&[5.0, 3.0], &[1, 1]);
        let sel = knapsack_01(&its, 0);
        assert!(sel.chosen.is_empty());
        assert_eq!(sel.total_value, 0.0);
        let cats = [Category::Zero, Category::One];
        assert!(knapsack_01_balanced(&its, &cats, 0).chosen.is_empty());
    }

    #[test]
    fn unit_weights_take_top_values() {
        let vals = [3.0, 9.0, 1.0, 7.0, 5.0, 8.0];
        let its = items(&vals, &[1; 6]);
        for b in 0..=6 {
            let sel = knapsack_01(&its, b);
            let mut sorted = vals.to_vec();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let top: f64 = sorted[..b].iter().sum();
            assert_eq!(sel.total_value, top);
            assert_eq!(brute_force(&its, b), top);
        }
    }

    #[test]
    fn equal_welfare_pair_is_chosen() {
        let its = items(&[4.0, 2.0, 4.0], &[1, 1, 1]);
        assert_eq!(brute_force(&its, 2), 8.0);
        assert_eq!(knapsack_01(&its, 2).chosen, vec![0, 2]);
        let cats = [Category::Zero, Category::Zero, Category::One];
        assert_eq!(knapsack_01_balanced(&its, &cats, 2).chosen, vec![0, 2]);
    }

    #[test]
    fn balance_breaks_value_ties() {
        // four equal values; positions 0, 1 share a category, 2 differs
        let its = items(&[2.0, 2.0, 2.0, 2.0], &[1; 4]);
        let cats = [
            Category::Zero,
            Category::Zero,
            Category::One,
            Category::Zero,
        ];
        assert_eq!(knapsack_01(&its, 2).chosen, vec![0, 1]);
        assert_eq!(knapsack_01_balanced(&its, &cats, 2).chosen, vec![0, 2]);
    }

    proptest! {
        #[test]
        fn dp_matches_brute_force(
            raw in proptest::collection::vec((0u32..50, 1usize..12), 0..12),
            budget in 0usize..40,
        ) {
            let its: Vec<KnapsackItem> = raw.iter().enumerate()
                .map(|(i, &(v, w))| KnapsackItem { student: i + 1, weight: w, value: v as f64 })
                .collect();
            let sel = knapsack_01(&its, budget);
            prop_assert!(sel.total_weight <= budget);
            prop_assert_eq!(sel.total_value, brute_force(&its, budget));
        }

        #[test]
        fn balanced_dp_keeps_the_optimum(
            raw in proptest::collection::vec((0u32..6, any::<bool>()), 0..11),
            budget in 0usize..6,
        ) {
            let its: Vec<KnapsackItem> = raw.iter().enumerate()
                .map(|(i, &(v, _))| KnapsackItem { student: i + 1, weight: 1, value: v as f64 })
                .collect();
            let cats: Vec<Category> = raw.iter()
                .map(|&(_, b)| if b { Category::One } else { Category::Zero })
                .collect();
            let sel = knapsack_01_balanced(&its, &cats, budget);
            prop_assert!(sel.chosen.len() <= budget);
            prop_assert_eq!(sel.total_value, brute_force(&its, budget));
        }
    }

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
    fn unwished_topic_gets_no_group_in_step_one() {
        let inst = instance(
            vec![vec![1, 2], vec![2, 1], vec![1, 2], vec![2, 1]],
            3,
            2,
            3,
        );
        let step = knapsack_selection_step(&inst, &KnapsackConfig::default());
        assert_eq!(step.group(3), None);
        for (t, members) in step.groups() {
            assert!(members.iter().all(|&s| inst.welfare().get(s, t) > 0.0));
        }
    }

    #[test]
    fn budget_follows_unassigned_count() {
        let inst = instance(vec![vec![1, 2]; 6], 2, 2, 3);
        assert_eq!(budget_for(&inst, 6, ModBasis::Unassigned), 2);
        assert_eq!(budget_for(&inst, 5, ModBasis::Unassigned), 3);
        assert_eq!(budget_for(&inst, 5, ModBasis::Global), 2);
    }

    #[test]
    fn six_students_complete_partition() {
        let inst = instance(
            vec![
                vec![1, 2, 3],
                vec![1, 3, 2],
                vec![1, 2, 3],
                vec![2, 1, 3],
                vec![3, 1, 2],
                vec![1, 3, 2],
            ],
            3,
            2,
            3,
        );
        for basis in [ModBasis::Unassigned, ModBasis::Global] {
            for order in [TopicOrder::Index, TopicOrder::Demand] {
                let cfg = KnapsackConfig {
                    balance_tiebreak: true,
                    mod_basis: basis,
                    topic_order: order,
                };
                let sol = knapsack_solve(&inst, &cfg).unwrap();
                assert!(is_complete_partition(&sol.grouping, &inst));
            }
        }
    }
}
