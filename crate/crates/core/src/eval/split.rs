//! Stratified k-fold partitioning and majority-class undersampling.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};
use crate::model::Label;
use crate::seed;

/// Row indices of one train/test split, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn class_name(positive: bool) -> &'static str {
    Label::from_positive(positive).as_str()
}

/// Partitions rows into `k` folds with class proportions preserved: every
/// class is shuffled and dealt round-robin, so fold sizes per class differ by
/// at most one. Each class needs at least `k` rows.
pub fn stratified_kfold(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(CascadeError::InvalidParams(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut rng = seed::rng(seed);
    let mut fold_of = vec![0usize; labels.len()];
    let mut offset = 0;
    for positive in [false, true] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == positive).collect();
        if idx.len() < k {
            return Err(CascadeError::TooFewSamples { class: class_name(positive), count: idx.len(), needed: k });
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            fold_of[i] = (offset + pos) % k;
        }
        // continue dealing where the previous class stopped so overall fold
        // sizes stay balanced too
        offset = (offset + idx.len()) % k;
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect())
}

/// Indices of a class-balanced subset: every minority row plus a uniform
/// random sample of equally many majority rows, sorted ascending.
pub fn undersample_balanced(labels: &[bool], seed: u64) -> Result<Vec<usize>> {
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(CascadeError::SingleClass);
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut rng = seed::rng(seed);
    let mut out = minority;
    out.extend(sample(&mut rng, majority.len(), out.len()).into_iter().map(|j| majority[j]));
    out.sort_unstable();
    Ok(out)
}

/// Convenience wrapper over [`undersample_balanced`] for labelled rows.
pub fn undersample_rows<T: Clone>(rows: &[(T, Label)], seed: u64) -> Result<Vec<(T, Label)>> {
    let labels: Vec<bool> = rows.iter().map(|(_, l)| l.is_positive()).collect();
    Ok(undersample_balanced(&labels, seed)?.into_iter().map(|i| rows[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<bool> = (0..23).map(|i| i % 3 == 0).collect();
        let folds = stratified_kfold(&labels, 5, 7).unwrap();
        let mut seen = vec![0; labels.len()];
        for f in &folds {
            for &i in &f.test {
                seen[i] += 1;
            }
            assert_eq!(f.train.len() + f.test.len(), labels.len());
            assert!(f.train.iter().all(|i| !f.test.contains(i)));
        }
        assert!(seen.iter().all(|&c| c == 1));
        let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn too_few_per_class() {
        let labels = [true, true, false, false, false, false, false];
        assert!(matches!(
            stratified_kfold(&labels, 5, 1),
            Err(CascadeError::TooFewSamples { class: "conspiracy", count: 2, needed: 5 })
        ));
    }

    #[test]
    fn undersample_balances() {
        let labels: Vec<bool> = (0..10).map(|i| i < 3).collect();
        let idx = undersample_balanced(&labels, 3).unwrap();
        assert_eq!(idx.len(), 6);
        assert_eq!(idx.iter().filter(|&&i| labels[i]).count(), 3);
        assert_eq!(idx, undersample_balanced(&labels, 3).unwrap());
    }
}
