use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::SplitSpec;
use crate::error::{Error, Result};

/// Accuracy of each class present in `labels`. Classes without test rows do
/// not appear in the map.
pub fn per_class_accuracy(predictions: &[usize], labels: &[usize]) -> Result<BTreeMap<usize, f64>> {
    if predictions.len() != labels.len() {
        return Err(Error::Dimension {
            op: "per_class_accuracy",
            left: (predictions.len(), 1),
            right: (labels.len(), 1),
        });
    }
    let mut tally: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&p, &y) in predictions.iter().zip(labels) {
        let e = tally.entry(y).or_insert((0, 0));
        e.0 += usize::from(p == y);
        e.1 += 1;
    }
    Ok(tally
        .into_iter()
        .map(|(c, (hit, n))| (c, hit as f64 / n as f64))
        .collect())
}

/// `2ab / (a + b)`, and 0 when both are 0.
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSummary {
    pub acc_seen: f64,
    pub acc_unseen: f64,
    pub h: f64,
    /// Classes of the split with no test rows; they are left out of the means.
    pub missing_classes: Vec<usize>,
}

fn mean_over(per_class: &BTreeMap<usize, f64>, classes: impl Iterator<Item = usize>, missing: &mut Vec<usize>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for c in classes {
        match per_class.get(&c) {
            Some(a) => {
                sum += a;
                n += 1;
            }
            None => missing.push(c),
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Unweighted means of per-class accuracy over the seen and unseen classes,
/// and their harmonic mean.
pub fn harmonic_summary(per_class: &BTreeMap<usize, f64>, split: &SplitSpec) -> HarmonicSummary {
    let mut missing = Vec::new();
    let acc_seen = mean_over(per_class, split.seen.iter().copied(), &mut missing);
    let acc_unseen = mean_over(per_class, split.unseen.iter().copied(), &mut missing);
    missing.sort_unstable();
    HarmonicSummary {
        acc_seen,
        acc_unseen,
        h: harmonic_mean(acc_seen, acc_unseen),
        missing_classes: missing,
    }
}

/// Mean and standard error of the mean; the SEM needs at least two values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub mean: f64,
    pub sem: Option<f64>,
}

pub fn mean_sem(values: &[f64]) -> Option<MeanSem> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let k = values[0];
    let sum: f64 = values.iter().map(|v| v - k).sum();
    let sum_sq: f64 = values.iter().map(|v| (v - k) * (v - k)).sum();
    let mean = k + sum / n;
    let sem = (values.len() >= 2).then(|| {
        let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    });
    Some(MeanSem { mean, sem })
}
