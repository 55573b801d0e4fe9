//! Construction of the interest (V), priority (W) and welfare matrices.

use std::collections::BTreeSet;

use crate::error::IngestError;
use crate::model::{DenseMatrix, InterestMatrix, PriorityMatrix, WelfareMatrix, WishMatrix};

/// `V[i, wishes[i][p]] = h / p` for 1-based rank `p`; zero elsewhere.
pub fn build_interest_matrix(
    wishes: &WishMatrix,
    h: usize,
    topics: usize,
) -> Result<InterestMatrix, IngestError> {
    let mut v = DenseMatrix::zeros(wishes.students(), topics);
    for (student, row) in wishes.rows() {
        check_row(student, row, h, topics)?;
        for (p, &topic) in row.iter().enumerate() {
            v.set(student, topic, h as f64 / (p + 1) as f64);
        }
    }
    Ok(InterestMatrix(v))
}

fn check_row(student: usize, row: &[usize], h: usize, topics: usize) -> Result<(), IngestError> {
    if row.len() != h {
        return Err(IngestError::WishRowLength {
            student,
            expected: h,
            found: row.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for &topic in row {
        if topic == 0 || topic > topics {
            return Err(IngestError::InvalidTopicIndex {
                student,
                value: topic as i64,
                topics,
            });
        }
        if !seen.insert(topic) {
            return Err(IngestError::DuplicateWish { student, topic });
        }
    }
    Ok(())
}

/// Per-topic priorities from registration order: among the `c` students
/// wishing a topic, the one registering `q`-th receives `(c - q + 1) / c`.
///
/// `registration[i]` is the time of student `i + 1`. Two choosers of the
/// same topic sharing a time is an error.
pub fn build_priority_matrix(
    wishes: &WishMatrix,
    registration: &[i64],
    topics: usize,
) -> Result<PriorityMatrix, IngestError> {
    let n = wishes.students();
    if registration.len() != n {
        return Err(IngestError::ShapeMismatch {
            expected: (n, topics),
            found: (registration.len(), topics),
        });
    }
    let mut choosers: Vec<Vec<(i64, usize)>> = vec![Vec::new(); topics];
    for (student, row) in wishes.rows() {
        for &topic in row {
            if topic == 0 || topic > topics {
                return Err(IngestError::InvalidTopicIndex {
                    student,
                    value: topic as i64,
                    topics,
                });
            }
            choosers[topic - 1].push((registration[student - 1], student));
        }
    }
    let mut w = DenseMatrix::zeros(n, topics);
    for (t, list) in choosers.iter_mut().enumerate() {
        list.sort_unstable();
        if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(IngestError::RegistrationTie {
                topic: t + 1,
                first: pair[0].1,
                second: pair[1].1,
            });
        }
        let c = list.len() as f64;
        for (q, &(_, student)) in list.iter().enumerate() {
            w.set(student, t + 1, (c - q as f64) / c);
        }
    }
    Ok(PriorityMatrix(w))
}

/// Entrywise `alpha * V + beta * W`.
pub fn build_welfare(
    interest: &InterestMatrix,
    priority: &PriorityMatrix,
    alpha: f64,
    beta: f64,
) -> Result<WelfareMatrix, IngestError> {
    if interest.0.shape() != priority.0.shape() {
        return Err(IngestError::ShapeMismatch {
            expected: interest.0.shape(),
            found: priority.0.shape(),
        });
    }
    Ok(WelfareMatrix {
        values: interest
            .0
            .zip_with(&priority.0, |v, w| alpha * v + beta * w),
        alpha,
        beta,
    })
}
