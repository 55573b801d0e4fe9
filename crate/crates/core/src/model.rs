//! Domain types shared by every solver: students, preference matrices,
//! cardinality bounds, instances and groupings.
//!
//! Students and topics are identified by 1-based indices throughout.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IngestError, Result};
use crate::welfare;

pub type StudentId = usize;
pub type TopicId = usize;

/// Binary protected attribute value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Zero,
    One,
}

impl Category {
    pub fn index(self) -> usize {
        match self {
            Category::Zero => 0,
            Category::One => 1,
        }
    }

    pub fn flipped(self) -> Category {
        match self {
            Category::Zero => Category::One,
            Category::One => Category::Zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Student {
    pub id: StudentId,
    pub category: Category,
    /// Registration timestamp or rank; `None` when the source only carries
    /// per-topic priorities.
    pub registration: Option<i64>,
    /// Identifier and name as they appeared in the source file.
    pub external_id: String,
    pub name: String,
}

impl Student {
    pub fn new(id: StudentId, category: Category, registration: Option<i64>) -> Self {
        Student {
            id,
            category,
            registration,
            external_id: id.to_string(),
            name: String::new(),
        }
    }
}

/// Dense `students x topics` matrix addressed with 1-based ids.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, student: StudentId, topic: TopicId) -> f64 {
        self.data[(student - 1) * self.cols + (topic - 1)]
    }

    pub fn set(&mut self, student: StudentId, topic: TopicId, value: f64) {
        self.data[(student - 1) * self.cols + (topic - 1)] = value;
    }

    pub fn row(&self, student: StudentId) -> &[f64] {
        let start = (student - 1) * self.cols;
        &self.data[start..start + self.cols]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_with(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> DenseMatrix {
        debug_assert_eq!(self.shape(), other.shape());
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// Ranked topic wishes, one row per student; position 0 is the favourite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WishMatrix {
    rows: Vec<Vec<TopicId>>,
}

impl WishMatrix {
    pub fn new(rows: Vec<Vec<TopicId>>) -> Self {
        WishMatrix { rows }
    }

    pub fn students(&self) -> usize {
        self.rows.len()
    }

    /// Number of wishes per student (taken from the first row).
    pub fn per_student(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row(&self, student: StudentId) -> &[TopicId] {
        &self.rows[student - 1]
    }

    pub fn rows(&self) -> impl Iterator<Item = (StudentId, &[TopicId])> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| (i + 1, r.as_slice()))
    }

    pub fn wishes(&self, student: StudentId, topic: TopicId) -> bool {
        self.row(student).contains(&topic)
    }

    /// 1-based preference rank of `topic` for `student`.
    pub fn rank_of(&self, student: StudentId, topic: TopicId) -> Option<usize> {
        self.row(student)
            .iter()
            .position(|&t| t == topic)
            .map(|p| p + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterestMatrix(pub DenseMatrix);

#[derive(Clone, Debug, PartialEq)]
pub struct PriorityMatrix(pub DenseMatrix);

#[derive(Clone, Debug, PartialEq)]
pub struct WelfareMatrix {
    pub values: DenseMatrix,
    pub alpha: f64,
    pub beta: f64,
}

impl WelfareMatrix {
    pub fn get(&self, student: StudentId, topic: TopicId) -> f64 {
        self.values.get(student, topic)
    }
}

/// Inclusive cardinality bounds `[lower, upper]` for every group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: usize,
    pub upper: usize,
}

impl Bounds {
    pub fn new(lower: usize, upper: usize) -> Result<Self> {
        if lower > upper {
            return Err(Error::InvalidBounds { lower, upper });
        }
        Ok(Bounds { lower, upper })
    }

    pub fn contains(&self, size: usize) -> bool {
        (self.lower..=self.upper).contains(&size)
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// Cardinality bounds and welfare weights for one solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub bounds: Bounds,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            bounds: Bounds { lower: 2, upper: 3 },
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    students: Vec<Student>,
    topics: usize,
    wishes: WishMatrix,
    interest: InterestMatrix,
    priority: PriorityMatrix,
    params: Params,
    welfare: WelfareMatrix,
}

impl Instance {
    /// Assembles an instance from prebuilt matrices. Only shapes are checked
    /// here; content invariants are reported by [`validate_instance`].
    pub fn new(
        students: Vec<Student>,
        topics: usize,
        wishes: WishMatrix,
        interest: InterestMatrix,
        priority: PriorityMatrix,
        params: Params,
    ) -> Result<Self> {
        if students.is_empty() {
            return Err(IngestError::Empty.into());
        }
        let n = students.len();
        for (pos, s) in students.iter().enumerate() {
            if s.id != pos + 1 {
                return Err(Error::Config(format!(
                    "student ids must be contiguous from 1; position {} has id {}",
                    pos + 1,
                    s.id
                )));
            }
        }
        let expected = (n, topics);
        if wishes.students() != n {
            return Err(IngestError::ShapeMismatch {
                expected,
                found: (wishes.students(), topics),
            }
            .into());
        }
        Bounds::new(params.bounds.lower, params.bounds.upper)?;
        let welfare = welfare::build_welfare(&interest, &priority, params.alpha, params.beta)?;
        if welfare.values.shape() != expected {
            return Err(IngestError::ShapeMismatch {
                expected,
                found: welfare.values.shape(),
            }
            .into());
        }
        Ok(Instance {
            students,
            topics,
            wishes,
            interest,
            priority,
            params,
            welfare,
        })
    }

    /// Builds V from the wishes and W from the students' registration times.
    pub fn from_registration(
        students: Vec<Student>,
        topics: usize,
        wishes: WishMatrix,
        params: Params,
    ) -> Result<Self> {
        let h = wishes.per_student();
        let interest = welfare::build_interest_matrix(&wishes, h, topics)?;
        let times: Vec<i64> = students
            .iter()
            .map(|s| s.registration.unwrap_or(s.id as i64))
            .collect();
        let priority = welfare::build_priority_matrix(&wishes, &times, topics)?;
        Instance::new(students, topics, wishes, interest, priority, params)
    }

    pub fn with_params(&self, params: Params) -> Result<Self> {
        Bounds::new(params.bounds.lower, params.bounds.upper)?;
        let mut next = self.clone();
        next.welfare =
            welfare::build_welfare(&self.interest, &self.priority, params.alpha, params.beta)?;
        next.params = params;
        Ok(next)
    }

    pub fn with_bounds(&self, bounds: Bounds) -> Result<Self> {
        self.with_params(Params {
            bounds,
            ..self.params
        })
    }

    pub fn n(&self) -> usize {
        self.students.len()
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn h(&self) -> usize {
        self.wishes.per_student()
    }

    pub fn students(&self) -> &[Student] {
        &self.students
    }

    pub fn student(&self, id: StudentId) -> &Student {
        &self.students[id - 1]
    }

    pub fn category(&self, id: StudentId) -> Category {
        self.students[id - 1].category
    }

    pub fn wishes(&self) -> &WishMatrix {
        &self.wishes
    }

    pub fn interest(&self) -> &InterestMatrix {
        &self.interest
    }

    pub fn priority(&self) -> &PriorityMatrix {
        &self.priority
    }

    pub fn welfare(&self) -> &WelfareMatrix {
        &self.welfare
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn bounds(&self) -> Bounds {
        self.params.bounds
    }

    /// Sort key used for the final deterministic tie-break.
    pub(crate) fn registration_key(&self, id: StudentId) -> (i64, StudentId) {
        let s = &self.students[id - 1];
        (s.registration.unwrap_or(i64::MAX), id)
    }
}

/// A set of disjoint topic-labelled groups. Empty groups are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    groups: BTreeMap<TopicId, Vec<StudentId>>,
}

impl Grouping {
    pub fn new() -> Self {
        Grouping::default()
    }

    /// Builds a grouping, rejecting any student listed twice.
    pub fn from_groups<I>(groups: I) -> Result<Self>
    where
        I: IntoIterator<Item = (TopicId, Vec<StudentId>)>,
    {
        let mut seen = BTreeSet::new();
        let mut out = BTreeMap::new();
        for (topic, members) in groups {
            if members.is_empty() {
                continue;
            }
            for &s in &members {
                if !seen.insert(s) {
                    return Err(Error::InvalidGrouping(format!(
                        "student {s} appears in more than one group"
                    )));
                }
            }
            if out.insert(topic, members).is_some() {
                return Err(Error::InvalidGrouping(format!(
                    "topic {topic} labels more than one group"
                )));
            }
        }
        Ok(Grouping { groups: out })
    }

    pub fn groups(&self) -> impl Iterator<Item = (TopicId, &[StudentId])> {
        self.groups.iter().map(|(&t, m)| (t, m.as_slice()))
    }

    pub fn group(&self, topic: TopicId) -> Option<&[StudentId]> {
        self.groups.get(&topic).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn assigned(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn topic_of(&self, student: StudentId) -> Option<TopicId> {
        self.groups
            .iter()
            .find(|(_, m)| m.contains(&student))
            .map(|(&t, _)| t)
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.groups.values().map(Vec::len).collect()
    }

    /// Checks that every id refers to a student and topic of `instance`.
    pub fn check_against(&self, instance: &Instance) -> Result<()> {
        for (&t, members) in &self.groups {
            if t == 0 || t > instance.topics() {
                return Err(Error::InvalidGrouping(format!("unknown topic {t}")));
            }
            if let Some(&s) = members.iter().find(|&&s| s == 0 || s > instance.n()) {
                return Err(Error::InvalidGrouping(format!("unknown student {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateWish {
        student: StudentId,
        topic: TopicId,
    },
    WishOutOfRange {
        student: StudentId,
        topic: TopicId,
    },
    WishRowLength {
        student: StudentId,
        found: usize,
    },
    InterestSupportMismatch {
        student: StudentId,
        topic: TopicId,
    },
    InterestValueMismatch {
        student: StudentId,
        topic: TopicId,
        expected: f64,
        found: f64,
    },
    PrioritySupportMismatch {
        student: StudentId,
        topic: TopicId,
    },
    PriorityOrder {
        topic: TopicId,
        earlier: StudentId,
        later: StudentId,
    },
    RegistrationTie {
        topic: TopicId,
        first: StudentId,
        second: StudentId,
    },
    TooManyWishes {
        wishes: usize,
        topics: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateWish { student, topic } => {
                write!(f, "duplicate wish: student {student}, topic {topic}")
            }
            Violation::WishOutOfRange { student, topic } => {
                write!(f, "wish out of range: student {student}, topic {topic}")
            }
            Violation::WishRowLength { student, found } => {
                write!(f, "wish row length: student {student} has {found} wishes")
            }
            Violation::InterestSupportMismatch { student, topic } => {
                write!(f, "V support mismatch: student {student}, topic {topic}")
            }
            Violation::InterestValueMismatch {
                student,
                topic,
                expected,
                found,
            } => write!(
                f,
                "V value mismatch: student {student}, topic {topic}: expected {expected}, found {found}"
            ),
            Violation::PrioritySupportMismatch { student, topic } => {
                write!(f, "W support mismatch: student {student}, topic {topic}")
            }
            Violation::PriorityOrder {
                topic,
                earlier,
                later,
            } => write!(
                f,
                "W order: on topic {topic} student {earlier} registered before {later} but has no larger priority"
            ),
            Violation::RegistrationTie {
                topic,
                first,
                second,
            } => write!(
                f,
                "non-distinct registration times on topic {topic}: students {first} and {second}"
            ),
            Violation::TooManyWishes { wishes, topics } => {
                write!(f, "{wishes} wishes per student exceeds {topics} topics")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Informational entries, e.g. registration ties resolved at ingestion.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans every structural invariant of `instance` and reports all violations.
pub fn validate_instance(instance: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let m = instance.topics();
    let h = instance.h();
    if h > m {
        report.violations.push(Violation::TooManyWishes {
            wishes: h,
            topics: m,
        });
    }
    let v = &instance.interest().0;
    let w = &instance.priority().0;
    for (student, row) in instance.wishes().rows() {
        if row.len() != h {
            report.violations.push(Violation::WishRowLength {
                student,
                found: row.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for &topic in row {
            if topic == 0 || topic > m {
                report
                    .violations
                    .push(Violation::WishOutOfRange { student, topic });
            } else if !seen.insert(topic) {
                report
                    .violations
                    .push(Violation::DuplicateWish { student, topic });
            }
        }
        for topic in 1..=m {
            let rank = row.iter().position(|&t| t == topic);
            let vv = v.get(student, topic);
            let ww = w.get(student, topic);
            if (vv > 0.0) != rank.is_some() {
                report
                    .violations
                    .push(Violation::InterestSupportMismatch { student, topic });
            } else if let Some(p) = rank {
                let expected = row.len() as f64 / (p + 1) as f64;
                if (vv - expected).abs() > 1e-9 * expected.max(1.0) {
                    report.violations.push(Violation::InterestValueMismatch {
                        student,
                        topic,
                        expected,
                        found: vv,
                    });
                }
            }
            if (ww > 0.0) != rank.is_some() {
                report
                    .violations
                    .push(Violation::PrioritySupportMismatch { student, topic });
            }
        }
    }

    // Priority ordering within each topic, only when registration times exist.
    if instance.students().iter().all(|s| s.registration.is_some()) {
        for topic in 1..=m {
            let mut choosers: Vec<(i64, StudentId)> = instance
                .students()
                .iter()
                .filter(|s| instance.wishes().wishes(s.id, topic))
                .map(|s| (s.registration.unwrap_or_default(), s.id))
                .collect();
            choosers.sort_unstable();
            for pair in choosers.windows(2) {
                let (t0, a) = pair[0];
                let (t1, b) = pair[1];
                if t0 == t1 {
                    report.violations.push(Violation::RegistrationTie {
                        topic,
                        first: a,
                        second: b,
                    });
                } else if w.get(a, topic) <= w.get(b, topic) {
                    report.violations.push(Violation::PriorityOrder {
                        topic,
                        earlier: a,
                        later: b,
                    });
                }
            }
        }
    }
    report
}

/// Range of group counts `k` compatible with the bounds, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    pub group_counts: Option<RangeInclusive<usize>>,
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        self.group_counts.is_some()
    }
}

/// Feasible iff some `1 <= k <= m` has `k * lower <= n <= k * upper`.
pub fn check_feasibility(n: usize, bounds: Bounds, topics: usize) -> FeasibilityVerdict {
    if bounds.upper == 0 {
        let counts = (n == 0 && topics >= 1).then_some(1..=topics);
        return FeasibilityVerdict {
            group_counts: counts,
        };
    }
    let k_min = n.div_ceil(bounds.upper).max(1);
    let k_max = match n.checked_div(bounds.lower) {
        Some(q) => q.min(topics),
        None => topics,
    };
    FeasibilityVerdict {
        group_counts: (k_min <= k_max).then_some(k_min..=k_max),
    }
}

pub(crate) fn ensure_feasible(instance: &Instance) -> Result<RangeInclusive<usize>> {
    check_feasibility(instance.n(), instance.bounds(), instance.topics())
        .group_counts
        .ok_or(Error::Infeasible {
            students: instance.n(),
            topics: instance.topics(),
            bounds: instance.bounds(),
        })
}

/// True iff every student appears exactly once and every group size lies
/// within the instance bounds.
pub fn is_complete_partition(grouping: &Grouping, instance: &Instance) -> bool {
    partition_defect(grouping, instance).is_none()
}

pub(crate) fn partition_defect(grouping: &Grouping, instance: &Instance) -> Option<String> {
    if grouping.check_against(instance).is_err() {
        return Some("grouping references unknown students or topics".into());
    }
    let bounds = instance.bounds();
    let mut seen = vec![false; instance.n()];
    for (topic, members) in grouping.groups() {
        if !bounds.contains(members.len()) {
            return Some(format!(
                "group {topic} has {} members, outside {bounds}",
                members.len()
            ));
        }
        for &s in members {
            if std::mem::replace(&mut seen[s - 1], true) {
                return Some(format!("student {s} appears twice"));
            }
        }
    }
    seen.iter()
        .position(|&x| !x)
        .map(|i| format!("student {} is unassigned", i + 1))
}
