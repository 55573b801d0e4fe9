//! Evaluation measures for a grouping: Nash product, its log-normalised form,
//! protected-attribute balance and wish satisfaction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Category, Grouping, Instance, Student, StudentId, WelfareMatrix, WishMatrix};

/// Welfare summed over the members of the group labelled `topic`.
pub fn group_welfare(members: &[StudentId], topic: usize, welfare: &WelfareMatrix) -> f64 {
    members.iter().map(|&s| welfare.get(s, topic)).sum()
}

/// Product over groups of `1 + group welfare`. An empty grouping yields 1.
pub fn nash_product(grouping: &Grouping, welfare: &WelfareMatrix) -> f64 {
    grouping
        .groups()
        .map(|(t, members)| 1.0 + group_welfare(members, t, welfare))
        .product()
}

/// Natural log of [`nash_product`], summed factor by factor so it stays
/// finite for large groupings.
pub fn ln_nash_product(grouping: &Grouping, welfare: &WelfareMatrix) -> f64 {
    grouping
        .groups()
        .map(|(t, members)| group_welfare(members, t, welfare).ln_1p())
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedNash {
    pub value: f64,
    /// Set when `k <= 1` and the natural log was used instead of `log_k`.
    pub degenerate: bool,
}

/// `log_k(nash)`; falls back to `ln(nash)` with a warning flag when `k <= 1`.
pub fn nash_normalized(nash: f64, k: usize) -> NormalizedNash {
    normalized_from_ln(nash.ln(), k)
}

pub(crate) fn normalized_from_ln(ln_nash: f64, k: usize) -> NormalizedNash {
    if k <= 1 {
        NormalizedNash {
            value: ln_nash,
            degenerate: true,
        }
    } else {
        NormalizedNash {
            value: ln_nash / (k as f64).ln(),
            degenerate: false,
        }
    }
}

/// `min(c0 / c1, c1 / c0)`, zero whenever one category is absent.
pub fn balance_of_counts(zeros: usize, ones: usize) -> f64 {
    if zeros == 0 || ones == 0 {
        0.0
    } else if zeros <= ones {
        zeros as f64 / ones as f64
    } else {
        ones as f64 / zeros as f64
    }
}

pub(crate) fn category_counts(members: &[StudentId], students: &[Student]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for &s in members {
        counts[students[s - 1].category.index()] += 1;
    }
    counts
}

/// Balance of one group of students.
pub fn group_balance(members: &[StudentId], students: &[Student]) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::EmptyGroup(0));
    }
    let [c0, c1] = category_counts(members, students);
    Ok(balance_of_counts(c0, c1))
}

/// Balance computed directly from a list of categories.
pub fn balance_of_categories(categories: &[Category]) -> Result<f64> {
    if categories.is_empty() {
        return Err(Error::EmptyGroup(0));
    }
    let ones = categories.iter().filter(|&&c| c == Category::One).count();
    Ok(balance_of_counts(categories.len() - ones, ones))
}

/// Minimum group balance over all groups.
pub fn grouping_balance(grouping: &Grouping, students: &[Student]) -> Result<f64> {
    let mut min = f64::INFINITY;
    for (topic, members) in grouping.groups() {
        let b = group_balance(members, students).map_err(|_| Error::EmptyGroup(topic))?;
        min = min.min(b);
    }
    if min.is_infinite() {
        // no groups at all
        return Err(Error::EmptyGroup(0));
    }
    Ok(min)
}

/// Fraction of the `n` students whose group topic is one of their wishes.
pub fn satisfaction(grouping: &Grouping, wishes: &WishMatrix, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::NoStudents);
    }
    let satisfied = grouping
        .groups()
        .map(|(t, members)| members.iter().filter(|&&s| wishes.wishes(s, t)).count())
        .sum::<usize>();
    Ok(satisfied as f64 / n as f64)
}

/// All measures for one grouping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub k: usize,
    pub nash_product: f64,
    pub ln_nash_product: f64,
    pub nash_normalized: f64,
    /// Present when the normalisation fell back to the natural log.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub balance: f64,
    pub satisfaction: f64,
    pub cardinalities: Vec<usize>,
}

impl MetricsReport {
    pub fn compute(grouping: &Grouping, instance: &Instance) -> Result<Self> {
        let welfare = instance.welfare();
        let k = grouping.len();
        let ln = ln_nash_product(grouping, welfare);
        let normalized = normalized_from_ln(ln, k);
        let warning = if k == 0 {
            Some("empty grouping: nash product over zero groups is 1".to_string())
        } else if normalized.degenerate {
            Some("single group: nash normalised with natural log".to_string())
        } else {
            None
        };
        let balance = if k == 0 {
            0.0
        } else {
            grouping_balance(grouping, instance.students())?
        };
        Ok(MetricsReport {
            k,
            nash_product: nash_product(grouping, welfare),
            ln_nash_product: ln,
            nash_normalized: normalized.value,
            warning,
            balance,
            satisfaction: satisfaction(grouping, instance.wishes(), instance.n())?,
            cardinalities: grouping.cardinalities(),
        })
    }

    pub fn min_cardinality(&self) -> Option<usize> {
        self.cardinalities.iter().copied().min()
    }

    pub fn max_cardinality(&self) -> Option<usize> {
        self.cardinalities.iter().copied().max()
    }

    pub const CSV_HEADER: [&'static str; 10] = [
        "method",
        "C_l",
        "C_u",
        "k",
        "nash_product",
        "nash_normalized",
        "balance",
        "satisfaction",
        "min_card",
        "max_card",
    ];

    /// One CSV record in [`Self::CSV_HEADER`] order.
    pub fn csv_record(&self, method: &str, lower: usize, upper: usize) -> Vec<String> {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            method.to_string(),
            lower.to_string(),
            upper.to_string(),
            self.k.to_string(),
            self.nash_product.to_string(),
            self.nash_normalized.to_string(),
            self.balance.to_string(),
            self.satisfaction.to_string(),
            opt(self.min_cardinality()),
            opt(self.max_cardinality()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DenseMatrix, Student};
    use proptest::prelude::*;

    fn students(cats: &[u8]) -> Vec<Student> {
        cats.iter()
            .enumerate()
            .map(|(i, &c)| {
                let cat = if c == 0 {
                    Category::Zero
                } else {
                    Category::One
                };
                Student::new(i + 1, cat, None)
            })
            .collect()
    }

    fn welfare_from(rows: &[&[f64]]) -> WelfareMatrix {
        let mut m = DenseMatrix::zeros(rows.len(), rows[0].len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m.set(i + 1, j + 1, x);
            }
        }
        WelfareMatrix {
            values: m,
            alpha: 1.0,
            beta: 1.0,
        }
    }

    #[test]
    fn nash_product_examples() {
        // group on topic 1 sums to 3, group on topic 2 sums to 4
        let w = welfare_from(&[&[1.0, 0.0], &[2.0, 0.0], &[0.0, 4.0]]);
        let g = Grouping::from_groups([(1, vec![1, 2]), (2, vec![3])]).unwrap();
        assert_eq!(nash_product(&g, &w), 20.0);
        assert!((ln_nash_product(&g, &w) - 20f64.ln()).abs() < 1e-12);

        let unwished = Grouping::from_groups([(2, vec![1, 2]), (1, vec![3])]).unwrap();
        assert_eq!(nash_product(&unwished, &w), 1.0);

        let single = Grouping::from_groups([(1, vec![1, 2])]).unwrap();
        assert_eq!(nash_product(&single, &w), 4.0);

        assert_eq!(nash_product(&Grouping::new(), &w), 1.0);
    }

    #[test]
    fn normalized_examples() {
        let n = nash_normalized(20.0, 2);
        assert!((n.value - 4.321928094887363).abs() < 1e-12);
        assert!(!n.degenerate);
        assert_eq!(nash_normalized(1.0, 7).value, 0.0);
        for k in 2..12usize {
            let v = nash_normalized((k as f64).powi(3), k).value;
            assert!((v - 3.0).abs() < 1e-12);
        }
        let d = nash_normalized(20.0, 1);
        assert!(d.degenerate);
        assert!((d.value - 20f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn balance_examples() {
        let s = students(&[0, 0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 0]);
        assert_eq!(group_balance(&[1, 2, 3, 4], &s).unwrap(), 1.0);
        assert!((group_balance(&[1, 6, 7, 8], &s).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(group_balance(&[1, 2, 5, 9], &s).unwrap(), 0.0);
        assert!(group_balance(&[], &s).is_err());

        let g = Grouping::from_groups([(1, vec![1, 2, 3, 4]), (2, vec![5, 6, 7, 8])]).unwrap();
        assert!((grouping_balance(&g, &s).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let one = Grouping::from_groups([(3, vec![1, 3])]).unwrap();
        assert_eq!(grouping_balance(&one, &s).unwrap(), 1.0);
    }

    #[test]
    fn roster_of_eight_and_sixteen_has_half_balance() {
        let mut cats = vec![1u8; 8];
        cats.extend(vec![0u8; 16]);
        let s = students(&cats);
        let all: Vec<usize> = (1..=24).collect();
        let g = Grouping::from_groups([(1, all)]).unwrap();
        assert_eq!(grouping_balance(&g, &s).unwrap(), 0.5);
    }

    #[test]
    fn satisfaction_examples() {
        let wishes = WishMatrix::new(vec![
            vec![1, 2],
            vec![2, 3],
            vec![3, 1],
            vec![1, 3],
            vec![2, 1],
        ]);
        let all = Grouping::from_groups([(1, vec![1, 4]), (2, vec![2, 5]), (3, vec![3])]).unwrap();
        assert_eq!(satisfaction(&all, &wishes, 5).unwrap(), 1.0);

        let none = Grouping::from_groups([
            (3, vec![1]),
            (1, vec![2]),
            (2, vec![3, 4]),
            (3 + 1, vec![5]),
        ])
        .unwrap();
        assert_eq!(satisfaction(&none, &wishes, 5).unwrap(), 0.0);

        // students 1, 2, 3 satisfied; 4 in unwished topic 2; 5 unassigned
        let partial = Grouping::from_groups([(1, vec![1]), (2, vec![2, 4]), (3, vec![3])]).unwrap();
        assert!((satisfaction(&partial, &wishes, 5).unwrap() - 0.6).abs() < 1e-15);

        assert!(satisfaction(&partial, &wishes, 0).is_err());
    }

    proptest! {
        #[test]
        fn balance_is_symmetric(cats in proptest::collection::vec(any::<bool>(), 1..20)) {
            let cs: Vec<Category> = cats.iter().map(|&b| if b { Category::One } else { Category::Zero }).collect();
            let flipped: Vec<Category> = cs.iter().map(|c| c.flipped()).collect();
            let b = balance_of_categories(&cs).unwrap();
            prop_assert_eq!(b, balance_of_categories(&flipped).unwrap());
            prop_assert!((0.0..=1.0).contains(&b));
        }

        #[test]
        fn normalized_is_increasing(a in 1.0f64..1e6, d in 1e-3f64..1e3, k in 2usize..50) {
            prop_assert!(nash_normalized(a + d, k).value > nash_normalized(a, k).value);
        }
    }
}
