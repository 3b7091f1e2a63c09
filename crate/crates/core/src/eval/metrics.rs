//! Threshold-free and threshold-based binary classification metrics.
//!
//! Labels are booleans with `true` meaning the positive (conspiracy) class;
//! scores are positive-class probabilities.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::classify::threshold;
use crate::error::{CascadeError, Result};

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(CascadeError::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

fn class_counts(labels: &[bool]) -> Result<(u64, u64)> {
    let pos = labels.iter().filter(|&&l| l).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(CascadeError::SingleClass);
    }
    Ok((pos, neg))
}

/// Sorts indices by descending score (ties adjacent).
fn order_desc(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// Groups of tied scores in descending order as `(score, positives, negatives)`.
fn tie_groups(scores: &[f64], labels: &[bool]) -> Vec<(f64, u64, u64)> {
    let mut groups: Vec<(f64, u64, u64)> = Vec::new();
    for i in order_desc(scores) {
        let s = scores[i];
        match groups.last_mut() {
            Some(g) if g.0 == s => {}
            _ => groups.push((s, 0, 0)),
        }
        let g = groups.last_mut().expect("just pushed");
        if labels[i] {
            g.1 += 1;
        } else {
            g.2 += 1;
        }
    }
    groups
}

/// Area under the ROC curve: the probability that a random positive scores
/// above a random negative, ties counting one half. Computed exactly from
/// integer pair counts.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores.len(), labels.len())?;
    let (pos, neg) = class_counts(labels)?;
    // doubled win count: 2 per strictly-won pair, 1 per tied pair
    let mut wins2: u128 = 0;
    let mut neg_below = neg;
    for (_, p, n) in tie_groups(scores, labels) {
        neg_below -= n;
        wins2 += 2 * u128::from(p) * u128::from(neg_below) + u128::from(p) * u128::from(n);
    }
    Ok(wins2 as f64 / (2 * u128::from(pos) * u128::from(neg)) as f64)
}

/// One ROC operating point: predicting positive when `score ≥ threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// `+∞` for the initial (0, 0) point; stored as `null` in JSON.
    #[serde(with = "infinite_as_null")]
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// ROC curve from (∞, 0, 0) through every distinct score down to (1, 1).
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<RocPoint>> {
    check_lengths(scores.len(), labels.len())?;
    let (pos, neg) = class_counts(labels)?;
    let mut pts = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0u64, 0u64);
    for (s, p, n) in tie_groups(scores, labels) {
        tp += p;
        fp += n;
        pts.push(RocPoint { threshold: s, fpr: fp as f64 / neg as f64, tpr: tp as f64 / pos as f64 });
    }
    Ok(pts)
}

/// Trapezoidal area under a ROC curve.
pub fn roc_area(points: &[RocPoint]) -> f64 {
    points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum()
}

/// 2×2 confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn from_predictions(pred: &[bool], labels: &[bool]) -> Result<Self> {
        check_lengths(pred.len(), labels.len())?;
        let mut c = Confusion::default();
        for (&p, &l) in pred.iter().zip(labels) {
            match (p, l) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// The same table with predictions and ground truth swapped.
    pub fn transposed(&self) -> Self {
        Confusion { tp: self.tp, fp: self.fn_, tn: self.tn, fn_: self.fp }
    }
}

fn ratio(num: u64, den: u64, what: &str) -> f64 {
    if den == 0 {
        warn!("{what}: zero denominator, reporting 0");
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Cohen's kappa mapped to [0, 1] as (κ + 1) / 2, so 0.5 is chance-level
/// agreement. Degenerate tables with p_e = 1 give 0.5.
pub fn kappa_from_confusion(c: &Confusion) -> f64 {
    let n = c.total();
    if n == 0 {
        return 0.5;
    }
    let n2 = u128::from(n) * u128::from(n);
    let agree = u128::from(c.tp + c.tn) * u128::from(n);
    let expected = u128::from(c.tp + c.fp) * u128::from(c.tp + c.fn_)
        + u128::from(c.fn_ + c.tn) * u128::from(c.fp + c.tn);
    if expected == n2 {
        return 0.5;
    }
    // κ = (p_o − p_e) / (1 − p_e), computed on the n²-scaled integers
    let kappa = (agree as f64 - expected as f64) / (n2 as f64 - expected as f64);
    (kappa + 1.0) / 2.0
}

/// Scaled kappa of hard predictions against labels.
pub fn kappa_scaled(pred: &[bool], labels: &[bool]) -> Result<f64> {
    Ok(kappa_from_confusion(&Confusion::from_predictions(pred, labels)?))
}

/// Precision, recall, accuracy and F1 of hard predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicMetrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

pub fn basic_metrics(pred: &[bool], labels: &[bool]) -> Result<BasicMetrics> {
    let c = Confusion::from_predictions(pred, labels)?;
    Ok(BasicMetrics { precision: precision(&c), recall: recall(&c), accuracy: accuracy(&c), f1: f1(&c) })
}

pub fn precision(c: &Confusion) -> f64 {
    ratio(c.tp, c.tp + c.fp, "precision")
}

pub fn recall(c: &Confusion) -> f64 {
    ratio(c.tp, c.tp + c.fn_, "recall")
}

pub fn accuracy(c: &Confusion) -> f64 {
    ratio(c.tp + c.tn, c.total(), "accuracy")
}

/// Harmonic mean of precision and recall, 2tp / (2tp + fp + fn).
pub fn f1(c: &Confusion) -> f64 {
    ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_, "f1")
}

/// The six metrics reported for every fold.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSet {
    pub auc: f64,
    pub kappa_scaled: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

impl MetricSet {
    pub const NAMES: [&'static str; 6] = ["auc", "kappa_scaled", "precision", "recall", "accuracy", "f1"];

    /// Evaluates scores against labels, thresholding at 0.5.
    pub fn evaluate(scores: &[f64], labels: &[bool]) -> Result<Self> {
        let c = Confusion::from_predictions(&threshold(scores), labels)?;
        Ok(MetricSet {
            auc: auc(scores, labels)?,
            kappa_scaled: kappa_from_confusion(&c),
            precision: precision(&c),
            recall: recall(&c),
            accuracy: accuracy(&c),
            f1: f1(&c),
        })
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.auc, self.kappa_scaled, self.precision, self.recall, self.accuracy, self.f1]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        MetricSet { auc: a[0], kappa_scaled: a[1], precision: a[2], recall: a[3], accuracy: a[4], f1: a[5] }
    }

    /// Element-wise mean in slice order (all zeros for an empty slice).
    pub fn mean(sets: &[MetricSet]) -> MetricSet {
        if sets.is_empty() {
            return MetricSet::default();
        }
        let mut acc = [0.0; 6];
        for s in sets {
            for (a, v) in acc.iter_mut().zip(s.to_array()) {
                *a += v;
            }
        }
        MetricSet::from_array(acc.map(|a| a / sets.len() as f64))
    }
}
