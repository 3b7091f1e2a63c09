mod common;

use cascade_core::eval::{
    auc, basic_metrics, kappa_scaled, roc_area, roc_curve, stratified_kfold, undersample_balanced, Confusion, MetricSet,
};
use cascade_core::{CascadeError, Label};
use proptest::prelude::*;
use rand::Rng;

/// O(P·N) pairwise oracle.
fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..300).prop_flat_map(|n| {
        (
            // coarse grid so ties are common
            proptest::collection::vec((0u8..20).prop_map(|k| f64::from(k) / 19.0), n),
            proptest::collection::vec(any::<bool>(), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn auc_matches_pairwise_oracle((scores, mut labels) in scored_labels()) {
        labels[0] = true;
        labels[1] = false;
        let a = auc(&scores, &labels).unwrap();
        prop_assert!((a - brute_auc(&scores, &labels)).abs() < 1e-12);
        prop_assert!((roc_area(&roc_curve(&scores, &labels).unwrap()) - a).abs() < 1e-12);
    }

    #[test]
    fn kappa_is_symmetric(pred in proptest::collection::vec(any::<bool>(), 1..200), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let labels: Vec<bool> = pred.iter().map(|_| r.gen()).collect();
        prop_assert_eq!(kappa_scaled(&pred, &labels).unwrap(), kappa_scaled(&labels, &pred).unwrap());
        let k = kappa_scaled(&pred, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&k));
    }

    #[test]
    fn f1_is_harmonic_mean(pred in proptest::collection::vec(any::<bool>(), 1..200), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let labels: Vec<bool> = pred.iter().map(|_| r.gen()).collect();
        let m = basic_metrics(&pred, &labels).unwrap();
        if m.precision > 0.0 && m.recall > 0.0 {
            let h = 2.0 * m.precision * m.recall / (m.precision + m.recall);
            prop_assert!((m.f1 - h).abs() < 1e-12);
        } else {
            prop_assert_eq!(m.f1, 0.0);
        }
    }

    #[test]
    fn folds_partition_and_stratify(n_pos in 5usize..200, n_neg in 5usize..200, k in 2usize..6, seed in any::<u64>()) {
        let mut labels = vec![true; n_pos];
        labels.extend(vec![false; n_neg]);
        let folds = stratified_kfold(&labels, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0u8; labels.len()];
        for f in &folds {
            for &i in &f.test {
                seen[i] += 1;
            }
            let pos = f.test.iter().filter(|&&i| labels[i]).count() as f64;
            let neg = f.test.len() as f64 - pos;
            prop_assert!((pos - n_pos as f64 / k as f64).abs() < 1.0);
            prop_assert!((neg - n_neg as f64 / k as f64).abs() < 1.0);
            let mut all: Vec<usize> = f.train.iter().chain(&f.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(&folds, &stratified_kfold(&labels, k, seed).unwrap());
    }

    #[test]
    fn undersampling_keeps_every_minority_row(n_pos in 1usize..100, n_neg in 1usize..100, seed in any::<u64>()) {
        let labels: Vec<bool> = (0..n_pos + n_neg).map(|i| i % (n_pos + n_neg) < n_pos).collect();
        let idx = undersample_balanced(&labels, seed).unwrap();
        let minority = n_pos.min(n_neg);
        prop_assert_eq!(idx.len(), 2 * minority);
        let minority_is_pos = n_pos <= n_neg;
        let kept_minority = idx.iter().filter(|&&i| labels[i] == minority_is_pos).count();
        prop_assert_eq!(kept_minority, minority);
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn auc_spec_examples() {
    assert_eq!(auc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
    assert_eq!(auc(&[0.3; 6], &[true, false, true, false, true, true]).unwrap(), 0.5);
    assert_eq!(auc(&[0.8, 0.8, 0.3, 0.3], &[true, false, true, false]).unwrap(), 0.5);
    assert!(matches!(auc(&[0.3, 0.2], &[false, false]), Err(CascadeError::SingleClass)));
}

#[test]
fn kappa_examples() {
    let labels = [true, false, true, false, true];
    assert_eq!(kappa_scaled(&labels, &labels).unwrap(), 1.0);
    let c = Confusion { tp: 40, fn_: 10, fp: 20, tn: 30 };
    assert!((cascade_core::eval::kappa_from_confusion(&c) - 0.7).abs() < 1e-12);
    assert!(matches!(kappa_scaled(&[true], &[true, false]), Err(CascadeError::LengthMismatch { .. })));
}

#[test]
fn coin_flip_kappa_is_chance_level() {
    let mut total = 0.0;
    for seed in 0..10 {
        let mut r = common::rng(seed);
        let labels: Vec<bool> = (0..2000).map(|i| i % 2 == 0).collect();
        let pred: Vec<bool> = (0..2000).map(|_| r.gen()).collect();
        total += kappa_scaled(&pred, &labels).unwrap();
    }
    assert!((total / 10.0 - 0.5).abs() < 0.05);
}

#[test]
fn random_classifier_baseline_concentrates_at_half() {
    let mut sums = [0.0; 6];
    for seed in 0..10 {
        let mut r = common::rng(100 + seed);
        let labels: Vec<bool> = (0..2000).map(|i| i < 1000).collect();
        let scores: Vec<f64> = (0..2000).map(|_| r.gen()).collect();
        let m = MetricSet::evaluate(&scores, &labels).unwrap();
        for (s, v) in sums.iter_mut().zip(m.to_array()) {
            *s += v;
        }
    }
    for (name, s) in MetricSet::NAMES.iter().zip(sums) {
        assert!((s / 10.0 - 0.5).abs() < 0.05, "{name}: {}", s / 10.0);
    }
}

#[test]
fn folds_of_balanced_hundred() {
    let labels: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
    for f in stratified_kfold(&labels, 5, 42).unwrap() {
        assert_eq!(f.test.iter().filter(|&&i| labels[i]).count(), 10);
        assert_eq!(f.test.iter().filter(|&&i| !labels[i]).count(), 10);
    }
}

/// Class counts of the original collection: 89491 conspiracy and 22650
/// science posts.
#[test]
fn folds_and_undersampling_at_original_scale() {
    let labels: Vec<bool> = (0..89491 + 22650).map(|i| i < 89491).collect();
    for f in stratified_kfold(&labels, 5, 7).unwrap() {
        let pos = f.test.iter().filter(|&&i| labels[i]).count() as f64;
        let neg = f.test.len() as f64 - pos;
        assert!((pos - 17898.2).abs() <= 1.0);
        assert!((neg - 4530.0).abs() <= 1.0);
    }
    let idx = undersample_balanced(&labels, 1).unwrap();
    let pos = idx.iter().filter(|&&i| labels[i]).count();
    assert_eq!((pos, idx.len() - pos), (22650, 22650));
    let other = undersample_balanced(&labels, 2).unwrap();
    assert_eq!(other.len(), idx.len());
    assert_ne!(other, idx);
}

#[test]
fn balanced_input_is_returned_whole() {
    let labels: Vec<bool> = (0..40).map(|i| i % 2 == 1).collect();
    assert_eq!(undersample_balanced(&labels, 9).unwrap(), (0..40).collect::<Vec<_>>());
    let rows: Vec<(u32, Label)> = (0..6).map(|i| (i, if i < 2 { Label::Conspiracy } else { Label::Science })).collect();
    let kept = cascade_core::eval::undersample_rows(&rows, 1).unwrap();
    assert_eq!(kept.len(), 4);
    assert!(kept.contains(&(0, Label::Conspiracy)) && kept.contains(&(1, Label::Conspiracy)));
}
