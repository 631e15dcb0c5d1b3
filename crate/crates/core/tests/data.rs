use std::collections::BTreeSet;

use ccvae::classify::knn_predict;
use ccvae::data::{
    gen_synthetic_benchmark, make_task, random_splits, sample_pairs, FeatureDataset, SplitSpec, SyntheticConfig,
};
use ccvae::nn::{Matrix, Rng};
use proptest::prelude::*;

fn accuracy(pred: &[usize], labels: &[usize]) -> f64 {
    pred.iter().zip(labels).filter(|(p, y)| p == y).count() as f64 / labels.len() as f64
}

#[test]
fn default_benchmark_has_a_real_domain_gap() {
    let b = gen_synthetic_benchmark(&SyntheticConfig::default()).unwrap();
    assert_eq!((b.source.len(), b.target.len()), (2000, 2000));
    assert_eq!(b.source.feature_dim(), 32);
    let cross = knn_predict(b.source.features(), b.source.labels(), b.target.features()).unwrap();
    let cross = accuracy(&cross, b.target.labels());
    // Within-target: even rows train, odd rows test.
    let even: Vec<usize> = (0..b.target.len()).step_by(2).collect();
    let odd: Vec<usize> = (1..b.target.len()).step_by(2).collect();
    let (tr, te) = (b.target.subset(&even), b.target.subset(&odd));
    let within = knn_predict(tr.features(), tr.labels(), te.features()).unwrap();
    let within = accuracy(&within, te.labels());
    assert!(cross < 0.40, "source→target 1NN {cross}");
    assert!(within > 0.95, "within-target 1NN {within}");
}

#[test]
fn same_seed_same_benchmark() {
    let cfg = SyntheticConfig {
        samples_per_class_per_domain: 20,
        ..SyntheticConfig::default()
    };
    let a = gen_synthetic_benchmark(&cfg).unwrap();
    let b = gen_synthetic_benchmark(&cfg).unwrap();
    assert_eq!(a.source, b.source);
    assert_eq!(a.target, b.target);
    let c = gen_synthetic_benchmark(&SyntheticConfig { seed: 1, ..cfg }).unwrap();
    assert_ne!(a.target, c.target);
}

#[test]
fn bad_config_names_the_field() {
    let cfg = SyntheticConfig {
        feature_dim: 0,
        ..SyntheticConfig::default()
    };
    let err = gen_synthetic_benchmark(&cfg).unwrap_err().to_string();
    assert!(err.contains("feature_dim"), "{err}");
}

fn indexed_task(per_class_target: usize) -> ccvae::data::GzsdaTask {
    // Each target row carries its own index, so partner draws can be counted.
    let mut sx = Vec::new();
    let mut sy = Vec::new();
    let mut tx = Vec::new();
    let mut ty = Vec::new();
    for c in 0..3 {
        for r in 0..5 {
            sx.push([c as f64, r as f64]);
            sy.push(c);
        }
        for _ in 0..2 * per_class_target {
            tx.push([c as f64, tx.len() as f64]);
            ty.push(c);
        }
    }
    let s = FeatureDataset::single_domain(Matrix::from_rows(&sx), sy, ccvae::data::Domain::Source).unwrap();
    let t = FeatureDataset::single_domain(Matrix::from_rows(&tx), ty, ccvae::data::Domain::Target).unwrap();
    make_task(&s, &t, &SplitSpec::new([0, 1], [2], 0.5, 4).unwrap()).unwrap()
}

#[test]
fn partners_are_uniform_over_the_class_pool() {
    let task = indexed_task(10);
    let class0: Vec<usize> = task.source_train.indices_of_class(0);
    let pool: Vec<f64> = task
        .target_train
        .indices_of_class(0)
        .iter()
        .map(|&i| task.target_train.features().get(i, 1))
        .collect();
    assert_eq!(pool.len(), 10);
    let order: Vec<usize> = std::iter::repeat_n(class0[0], 10_000).collect();
    let batch = sample_pairs(&task, &order, 0, order.len(), &mut Rng::new(8)).unwrap();
    let mut counts = [0f64; 10];
    for i in 0..batch.len() {
        let id = batch.x_t.get(i, 1);
        counts[pool.iter().position(|&p| p == id).unwrap()] += 1.0;
    }
    let e = 1000.0;
    let chi2: f64 = counts.iter().map(|o| (o - e) * (o - e) / e).sum();
    // 99th percentile of chi-square with 9 degrees of freedom.
    assert!(chi2 < 21.666, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn pairs_share_the_class_and_unseen_rows_are_masked() {
    let task = indexed_task(4);
    let order: Vec<usize> = (0..task.source_train.len()).collect();
    let batch = sample_pairs(&task, &order, 0, order.len(), &mut Rng::new(1)).unwrap();
    for i in 0..batch.len() {
        let c = batch.class_labels[i];
        assert_eq!(batch.x_s.get(i, 0), c as f64);
        assert!(batch.valid_s[i]);
        assert_eq!(batch.valid_t[i], c != 2);
        if batch.valid_t[i] {
            assert_eq!(batch.x_t.get(i, 0), c as f64);
        } else {
            assert!(batch.x_t.row(i).iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn split_rejects_overlap_and_bad_fraction() {
    assert!(SplitSpec::new([0, 1], [1, 2], 0.5, 0).is_err());
    assert!(SplitSpec::new([0], [1], 1.0, 0).is_err());
    assert!(SplitSpec::new([0], [1], 0.0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tasks_never_leak_unseen_target_records(seed in any::<u64>(), unseen in 1usize..5, frac in 0.1f64..0.9) {
        let cfg = SyntheticConfig {
            num_classes: 6,
            feature_dim: 4,
            samples_per_class_per_domain: 7,
            seed,
            ..SyntheticConfig::default()
        };
        let b = gen_synthetic_benchmark(&cfg).unwrap();
        let mut split = random_splits(6, unseen, 1, seed).unwrap().remove(0);
        split.target_train_fraction = frac;
        let task = make_task(&b.source, &b.target, &split).unwrap();
        prop_assert_eq!(split.unseen.len(), unseen);
        prop_assert!(task.target_train.labels().iter().all(|c| split.seen.contains(c)));
        prop_assert_eq!(task.source_train.len(), b.source.len());
        let train: BTreeSet<usize> = task.target_train_ids.iter().copied().collect();
        let test: BTreeSet<usize> = task.target_test_ids.iter().copied().collect();
        prop_assert!(train.is_disjoint(&test));
        prop_assert_eq!(train.len() + test.len(), b.target.len());
        for &c in &split.seen {
            let n = task.target_train.indices_of_class(c).len();
            prop_assert_eq!(n, (7.0 * frac).floor() as usize);
        }
        for &c in &split.unseen {
            prop_assert_eq!(task.target_test.indices_of_class(c).len(), 7);
        }
    }
}
