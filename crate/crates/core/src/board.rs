//! Mutable working state shared by the solvers while a grouping is built.

use std::cmp::Ordering;

use crate::metrics::balance_of_counts;
use crate::model::{Grouping, Instance, StudentId, TopicId};

/// Welfare values closer than this are treated as equal when breaking ties.
pub(crate) const TIE_EPS: f64 = 1e-9;

pub(crate) fn cmp_welfare(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= TIE_EPS * a.abs().max(b.abs()).max(1.0) {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

pub(crate) struct Board<'a> {
    pub instance: &'a Instance,
    members: Vec<Vec<StudentId>>,
    counts: Vec<[usize; 2]>,
    topic_of: Vec<Option<TopicId>>,
}

impl<'a> Board<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Board {
            instance,
            members: vec![Vec::new(); instance.topics()],
            counts: vec![[0; 2]; instance.topics()],
            topic_of: vec![None; instance.n()],
        }
    }

    pub fn from_grouping(instance: &'a Instance, grouping: &Grouping) -> Self {
        let mut board = Board::new(instance);
        for (topic, members) in grouping.groups() {
            for &s in members {
                board.assign(s, topic);
            }
        }
        board
    }

    pub fn into_grouping(self) -> Grouping {
        let groups = self
            .members
            .into_iter()
            .enumerate()
            .map(|(t, m)| (t + 1, m));
        Grouping::from_groups(groups).expect("board keeps groups disjoint")
    }

    pub fn assign(&mut self, student: StudentId, topic: TopicId) {
        debug_assert!(self.topic_of[student - 1].is_none());
        self.members[topic - 1].push(student);
        self.counts[topic - 1][self.instance.category(student).index()] += 1;
        self.topic_of[student - 1] = Some(topic);
    }

    pub fn remove(&mut self, student: StudentId) {
        if let Some(topic) = self.topic_of[student - 1].take() {
            self.members[topic - 1].retain(|&s| s != student);
            self.counts[topic - 1][self.instance.category(student).index()] -= 1;
        }
    }

    /// Empties the group of `topic`, returning its former members.
    pub fn disband(&mut self, topic: TopicId) -> Vec<StudentId> {
        let freed = std::mem::take(&mut self.members[topic - 1]);
        self.counts[topic - 1] = [0; 2];
        for &s in &freed {
            self.topic_of[s - 1] = None;
        }
        freed
    }

    pub fn size(&self, topic: TopicId) -> usize {
        self.members[topic - 1].len()
    }

    pub fn members(&self, topic: TopicId) -> &[StudentId] {
        &self.members[topic - 1]
    }

    #[cfg(test)]
    pub fn topic_of(&self, student: StudentId) -> Option<TopicId> {
        self.topic_of[student - 1]
    }

    pub fn is_assigned(&self, student: StudentId) -> bool {
        self.topic_of[student - 1].is_some()
    }

    pub fn unassigned(&self) -> Vec<StudentId> {
        (1..=self.instance.n())
            .filter(|&s| !self.is_assigned(s))
            .collect()
    }

    /// Topics with a non-empty group, ascending.
    pub fn open_topics(&self) -> impl Iterator<Item = TopicId> + '_ {
        (1..=self.instance.topics()).filter(|&t| !self.members[t - 1].is_empty())
    }

    pub fn welfare(&self, student: StudentId, topic: TopicId) -> f64 {
        self.instance.welfare().get(student, topic)
    }

    pub fn welfare_sum(&self, topic: TopicId) -> f64 {
        self.members[topic - 1]
            .iter()
            .map(|&s| self.welfare(s, topic))
            .sum()
    }

    /// Group balance of `topic` if `student` joined it.
    pub fn balance_with(&self, topic: TopicId, student: StudentId) -> f64 {
        let mut c = self.counts[topic - 1];
        c[self.instance.category(student).index()] += 1;
        balance_of_counts(c[0], c[1])
    }

    /// Group balance of `topic` if `student` left it.
    pub fn balance_without(&self, topic: TopicId, student: StudentId) -> f64 {
        let mut c = self.counts[topic - 1];
        c[self.instance.category(student).index()] -= 1;
        balance_of_counts(c[0], c[1])
    }

    /// Picks the candidate to admit into `topic`: highest welfare, then (if
    /// enabled) the best resulting balance, then earliest registration, then
    /// lowest id. Returns the index into `candidates`.
    pub fn best_candidate(
        &self,
        topic: TopicId,
        candidates: &[StudentId],
        balance_tiebreak: bool,
    ) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (idx, &s) in candidates.iter().enumerate() {
            let better = match best {
                None => true,
                Some(b) => {
                    self.compare_candidates(topic, s, candidates[b], balance_tiebreak)
                        == Ordering::Greater
                }
            };
            if better {
                best = Some(idx);
            }
        }
        best
    }

    /// `Greater` means `a` should be admitted before `b`.
    fn compare_candidates(
        &self,
        topic: TopicId,
        a: StudentId,
        b: StudentId,
        balance_tiebreak: bool,
    ) -> Ordering {
        cmp_welfare(self.welfare(a, topic), self.welfare(b, topic))
            .then_with(|| {
                if balance_tiebreak {
                    self.balance_with(topic, a)
                        .total_cmp(&self.balance_with(topic, b))
                } else {
                    Ordering::Equal
                }
            })
            .then_with(|| {
                self.instance
                    .registration_key(b)
                    .cmp(&self.instance.registration_key(a))
            })
    }
}
