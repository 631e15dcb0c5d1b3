//! Seen/unseen class splits and GZSDA task construction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::FeatureDataset;
use crate::error::{Error, Result};
use crate::nn::{derive_seed, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seen: BTreeSet<usize>,
    pub unseen: BTreeSet<usize>,
    pub target_train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(
        seen: impl IntoIterator<Item = usize>,
        unseen: impl IntoIterator<Item = usize>,
        target_train_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            seen: seen.into_iter().collect(),
            unseen: unseen.into_iter().collect(),
            target_train_fraction,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.seen.intersection(&self.unseen).next() {
            return Err(Error::Config(format!("class {c} is both seen and unseen")));
        }
        if !(self.target_train_fraction > 0.0 && self.target_train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "target_train_fraction must be in (0, 1), got {}",
                self.target_train_fraction
            )));
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.seen.len() + self.unseen.len()
    }

    pub fn is_seen(&self, class: usize) -> bool {
        self.seen.contains(&class)
    }
}

/// One experiment instance.
#[derive(Debug, Clone)]
pub struct GzsdaTask {
    /// Every source record, all classes.
    pub source_train: FeatureDataset,
    /// Labelled target records, seen classes only.
    pub target_train: FeatureDataset,
    /// Held-out target records, all classes.
    pub target_test: FeatureDataset,
    /// Row indices into the original target set.
    pub target_train_ids: Vec<usize>,
    pub target_test_ids: Vec<usize>,
    pub split: SplitSpec,
}

impl GzsdaTask {
    pub fn num_classes(&self) -> usize {
        self.split.num_classes()
    }
}

/// Splits the target set per class: for seen classes `⌊n·fraction⌋` shuffled
/// records go to training and the rest to test; unseen classes go entirely
/// to test. The source set passes through whole.
pub fn make_task(source: &FeatureDataset, target: &FeatureDataset, split: &SplitSpec) -> Result<GzsdaTask> {
    split.validate()?;
    if source.feature_dim() != target.feature_dim() {
        return Err(Error::Dimension {
            op: "make_task",
            left: (source.len(), source.feature_dim()),
            right: (target.len(), target.feature_dim()),
        });
    }
    let universe: BTreeSet<usize> = split.seen.union(&split.unseen).copied().collect();
    for (name, ds) in [("source", source), ("target", target)] {
        if let Some(c) = ds.classes().iter().find(|c| !universe.contains(c)) {
            return Err(Error::Config(format!(
                "{name} class {c} is neither seen nor unseen in the split"
            )));
        }
    }

    let mut rng = Rng::new(derive_seed(split.seed, "target-split", 0));
    let mut train_ids = Vec::new();
    let mut test_ids = Vec::new();
    for &class in &universe {
        let mut idx = target.indices_of_class(class);
        if split.is_seen(class) {
            if idx.is_empty() {
                return Err(Error::EmptySet(format!(
                    "seen class {class} has no target records to pair with"
                )));
            }
            rng.shuffle(&mut idx);
            let n_train = (idx.len() as f64 * split.target_train_fraction).floor() as usize;
            train_ids.extend_from_slice(&idx[..n_train]);
            test_ids.extend_from_slice(&idx[n_train..]);
        } else {
            test_ids.extend_from_slice(&idx);
        }
    }
    train_ids.sort_unstable();
    test_ids.sort_unstable();

    Ok(GzsdaTask {
        source_train: source.clone(),
        target_train: target.subset(&train_ids),
        target_test: target.subset(&test_ids),
        target_train_ids: train_ids,
        target_test_ids: test_ids,
        split: split.clone(),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `num_splits` distinct seen/unseen partitions of `0..num_classes`, each with
/// its own derived seed and a 0.5 target train fraction.
pub fn random_splits(num_classes: usize, num_unseen: usize, num_splits: usize, seed: u64) -> Result<Vec<SplitSpec>> {
    if num_unseen == 0 {
        return Err(Error::Config("num_unseen must be at least 1".into()));
    }
    if num_unseen >= num_classes {
        return Err(Error::Config(format!(
            "num_unseen ({num_unseen}) must be below num_classes ({num_classes})"
        )));
    }
    if binomial(num_classes, num_unseen) < num_splits as u128 {
        return Err(Error::Config(format!(
            "only {} distinct partitions exist, {num_splits} requested",
            binomial(num_classes, num_unseen)
        )));
    }
    let mut rng = Rng::new(derive_seed(seed, "partition", 0));
    let mut out: Vec<SplitSpec> = Vec::with_capacity(num_splits);
    while out.len() < num_splits {
        let perm = rng.permutation(num_classes);
        let unseen: BTreeSet<usize> = perm[..num_unseen].iter().copied().collect();
        if out.iter().any(|s| s.unseen == unseen) {
            continue;
        }
        let seen = perm[num_unseen..].iter().copied().collect();
        out.push(SplitSpec {
            seen,
            unseen,
            target_train_fraction: 0.5,
            seed: derive_seed(seed, "split", out.len() as u64),
        });
    }
    Ok(out)
}
