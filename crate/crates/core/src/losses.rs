//! Bounded losses from model outputs and informativeness scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LossVector;

const ROW_TOL: f64 = 1e-9;

/// Softmax outputs, one row of `k` class probabilities per pool point.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxMatrix {
    rows: Vec<Vec<f64>>,
    classes: usize,
}

impl SoftmaxMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if classes == 0 {
            return Err(Error::contract("softmax matrix needs at least one row and one class"));
        }
        for (i, row) in rows.iter().enumerate() {
            Error::check_len(classes, row.len())?;
            if row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::contract(format!("softmax row {i} has a negative entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOL {
                return Err(Error::contract(format!("softmax row {i} sums to {total}")));
            }
        }
        Ok(Self { rows, classes })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn points(&self) -> usize {
        self.rows.len()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }
}

/// Which softmax transform a replayed stream uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoftmaxTransform {
    /// Maximum class probability.
    #[default]
    Uncertainty,
    /// One minus the normalized entropy.
    Entropy,
}

impl SoftmaxTransform {
    pub fn apply(self, sm: &SoftmaxMatrix, round: usize) -> Result<LossVector> {
        match self {
            SoftmaxTransform::Uncertainty => uncertainty_loss(sm, round),
            SoftmaxTransform::Entropy => entropy_loss(sm, round),
        }
    }
}

/// `l_i = max_j f_ij`: confident predictions carry high loss.
pub fn uncertainty_loss(sm: &SoftmaxMatrix, round: usize) -> Result<LossVector> {
    let values = sm
        .rows
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max).min(1.0))
        .collect();
    LossVector::new(values, round)
}

/// `l_i = 1 - H(f_i) / log k`, with `0 log 0 = 0`.
pub fn entropy_loss(sm: &SoftmaxMatrix, round: usize) -> Result<LossVector> {
    if sm.classes < 2 {
        return Err(Error::contract("entropy loss needs at least two classes"));
    }
    let log_k = (sm.classes as f64).ln();
    let values = sm
        .rows
        .iter()
        .map(|row| {
            let entropy: f64 = row
                .iter()
                .filter(|p| **p > 0.0)
                .map(|p| -p * p.ln())
                .sum();
            (1.0 - entropy / log_k).clamp(0.0, 1.0)
        })
        .collect();
    LossVector::new(values, round)
}

/// Non-negative informativeness scores with an optional a-priori bound.
#[derive(Debug, Clone, PartialEq)]
pub struct InformativenessScores {
    values: Vec<f64>,
    declared_max: Option<f64>,
}

impl InformativenessScores {
    pub fn new(values: Vec<f64>, declared_max: Option<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::contract(format!("informativeness score {v} is not >= 0")));
        }
        if let Some(max) = declared_max {
            if !(max > 0.0) || !max.is_finite() {
                return Err(Error::contract(format!("declared maximum {max} must be positive")));
            }
            if let Some(v) = values.iter().find(|v| **v > max) {
                return Err(Error::contract(format!(
                    "score {v} exceeds the declared maximum {max}"
                )));
            }
        }
        Ok(Self {
            values,
            declared_max,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn declared_max(&self) -> Option<f64> {
        self.declared_max
    }
}

/// How scores were scaled into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// By the declared bound; comparable across rounds.
    Declared(f64),
    /// By this round's largest score; not comparable across rounds.
    PerRound(f64),
}

impl Normalization {
    pub fn is_per_round(&self) -> bool {
        matches!(self, Normalization::PerRound(_))
    }
}

/// `l_i = 1 - s_i / max`, using the declared bound when there is one and
/// this round's maximum otherwise.
pub fn normalized_score_loss(
    scores: &InformativenessScores,
    round: usize,
) -> Result<(LossVector, Normalization)> {
    let norm = match scores.declared_max {
        Some(max) => Normalization::Declared(max),
        None => Normalization::PerRound(scores.values.iter().copied().fold(0.0, f64::max)),
    };
    let scale = match norm {
        Normalization::Declared(m) | Normalization::PerRound(m) => m,
    };
    let values = scores
        .values
        .iter()
        .map(|s| if scale > 0.0 { 1.0 - s / scale } else { 1.0 })
        .collect();
    Ok((LossVector::new(values, round)?, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sm(rows: &[&[f64]]) -> SoftmaxMatrix {
        SoftmaxMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn uncertainty_examples() {
        let m = sm(&[&[0.0, 1.0, 0.0, 0.0], &[0.25; 4]]);
        assert_eq!(uncertainty_loss(&m, 1).unwrap().values(), &[1.0, 0.25]);
        let m = sm(&[&[0.6, 0.3, 0.1]]);
        assert_eq!(uncertainty_loss(&m, 1).unwrap().values(), &[0.6]);
    }

    #[test]
    fn entropy_examples() {
        let m = sm(&[&[1.0 / 3.0; 3], &[0.0, 0.0, 1.0], &[0.5, 0.5, 0.0]]);
        let l = entropy_loss(&m, 1).unwrap();
        assert!(l.values()[0].abs() < 1e-15);
        assert_eq!(l.values()[1], 1.0);
        assert!((l.values()[2] - 0.369_070_246).abs() < 1e-8);
    }

    #[test]
    fn entropy_needs_two_classes() {
        assert!(entropy_loss(&sm(&[&[1.0]]), 1).is_err());
    }

    #[test]
    fn non_stochastic_row_is_rejected() {
        assert!(SoftmaxMatrix::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(SoftmaxMatrix::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
    }

    #[test]
    fn score_examples() {
        let s = InformativenessScores::new(vec![2.0, 1.0, 4.0, 0.0], Some(4.0)).unwrap();
        let (l, norm) = normalized_score_loss(&s, 1).unwrap();
        assert_eq!(l.values(), &[0.5, 0.75, 0.0, 1.0]);
        assert!(!norm.is_per_round());
    }

    #[test]
    fn score_over_bound_is_rejected() {
        assert!(InformativenessScores::new(vec![5.0], Some(4.0)).is_err());
    }

    #[test]
    fn per_round_normalization_is_flagged() {
        let s = InformativenessScores::new(vec![2.0, 1.0], None).unwrap();
        let (l, norm) = normalized_score_loss(&s, 3).unwrap();
        assert_eq!(l.values(), &[0.0, 0.5]);
        assert_eq!(norm, Normalization::PerRound(2.0));
    }

    fn row(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, k)
            .prop_filter("mass", |w| w.iter().sum::<f64>() > 1e-6)
            .prop_map(|w| {
                let t: f64 = w.iter().sum();
                w.iter().map(|x| x / t).collect()
            })
    }

    proptest! {
        #[test]
        fn losses_are_bounded_and_permutation_invariant(r in row(5), shift in 0usize..5) {
            let mut rotated = r.clone();
            rotated.rotate_left(shift);
            let m = SoftmaxMatrix::new(vec![r, rotated]).unwrap();
            let u = uncertainty_loss(&m, 1).unwrap();
            let e = entropy_loss(&m, 1).unwrap();
            prop_assert!(u.values().iter().all(|v| *v >= 0.2 - 1e-12 && *v <= 1.0));
            prop_assert!(e.values().iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(u.values()[0], u.values()[1]);
            prop_assert!((e.values()[0] - e.values()[1]).abs() < 1e-12);
        }
    }
}
