//! Same-class source/target pairing for CCVAE training.

use std::collections::BTreeMap;

use super::{FeatureDataset, GzsdaTask};
use crate::error::{Error, Result};
use crate::nn::{Matrix, Rng};

/// Row-aligned source/target features.
///
/// `valid_t[i] == false` marks a dummy target entry (zeros), used for source
/// samples of classes with no labelled target data. `valid_s[i] == false`
/// marks a padding row whose source entry is a dummy as well; such a row
/// takes no part in any loss term.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub x_s: Matrix,
    pub x_t: Matrix,
    pub class_labels: Vec<usize>,
    pub valid_s: Vec<bool>,
    pub valid_t: Vec<bool>,
}

impl PairBatch {
    /// Every source row valid; target rows follow `valid_t`, and invalid
    /// target rows are zeroed.
    pub fn new(x_s: Matrix, mut x_t: Matrix, class_labels: Vec<usize>, valid_t: Vec<bool>) -> Result<Self> {
        let n = x_s.rows();
        if x_t.shape() != x_s.shape() || class_labels.len() != n || valid_t.len() != n {
            return Err(Error::Dimension {
                op: "PairBatch::new",
                left: x_s.shape(),
                right: x_t.shape(),
            });
        }
        for (i, &v) in valid_t.iter().enumerate() {
            if !v {
                x_t.row_mut(i).fill(0.0);
            }
        }
        Ok(Self {
            x_s,
            x_t,
            class_labels,
            valid_s: vec![true; n],
            valid_t,
        })
    }

    pub fn len(&self) -> usize {
        self.class_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.x_s.cols()
    }

    /// Appends a row. `target == None` makes the target entry a dummy.
    pub fn push(&mut self, source: &[f64], target: Option<&[f64]>, class: usize) -> Result<()> {
        let d = self.feature_dim();
        let zeros = vec![0.0; d];
        let t = target.unwrap_or(&zeros);
        if source.len() != d || t.len() != d {
            return Err(Error::Dimension {
                op: "PairBatch::push",
                left: (1, source.len()),
                right: (1, d),
            });
        }
        self.x_s = Matrix::vcat(&[&self.x_s, &Matrix::from_rows(&[source])])?;
        self.x_t = Matrix::vcat(&[&self.x_t, &Matrix::from_rows(&[t])])?;
        self.class_labels.push(class);
        self.valid_s.push(true);
        self.valid_t.push(target.is_some());
        Ok(())
    }

    /// Appends a fully dummy row (zeros on both sides, both masks off).
    pub fn push_padding(&mut self) {
        let zeros = Matrix::zeros(1, self.feature_dim());
        self.x_s = Matrix::vcat(&[&self.x_s, &zeros]).expect("same width");
        self.x_t = Matrix::vcat(&[&self.x_t, &zeros]).expect("same width");
        self.class_labels.push(0);
        self.valid_s.push(false);
        self.valid_t.push(false);
    }

    pub fn valid_source_rows(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.valid_s[i]).collect()
    }

    /// Rows with both a real source and a real target entry.
    pub fn valid_pair_rows(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.valid_s[i] && self.valid_t[i])
            .collect()
    }
}

/// Draws target partners uniformly, with replacement, from the labelled
/// target records of the source sample's class.
#[derive(Debug, Clone)]
pub struct PairSampler<'a> {
    source: &'a FeatureDataset,
    target: &'a FeatureDataset,
    by_class: BTreeMap<usize, Vec<usize>>,
}

impl<'a> PairSampler<'a> {
    pub fn new(source: &'a FeatureDataset, target: &'a FeatureDataset) -> Result<Self> {
        if source.feature_dim() != target.feature_dim() {
            return Err(Error::Dimension {
                op: "PairSampler::new",
                left: (source.len(), source.feature_dim()),
                right: (target.len(), target.feature_dim()),
            });
        }
        let source_classes = source.classes();
        let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in target.labels().iter().enumerate() {
            if !source_classes.contains(&c) {
                return Err(Error::Config(format!(
                    "target class {c} has no source samples"
                )));
            }
            by_class.entry(c).or_default().push(i);
        }
        Ok(Self {
            source,
            target,
            by_class,
        })
    }

    pub fn for_task(task: &'a GzsdaTask) -> Result<Self> {
        Self::new(&task.source_train, &task.target_train)
    }

    pub fn has_partner(&self, class: usize) -> bool {
        self.by_class.contains_key(&class)
    }

    /// Builds the batch for `order[start .. start + batch_size]` (clipped).
    pub fn sample(&self, order: &[usize], start: usize, batch_size: usize, rng: &mut Rng) -> PairBatch {
        let end = (start + batch_size).min(order.len());
        let rows = &order[start.min(end)..end];
        let d = self.source.feature_dim();
        let x_s = self.source.features().gather_rows(rows);
        let mut x_t = Matrix::zeros(rows.len(), d);
        let mut labels = Vec::with_capacity(rows.len());
        let mut valid_t = Vec::with_capacity(rows.len());
        for (r, &i) in rows.iter().enumerate() {
            let class = self.source.labels()[i];
            labels.push(class);
            match self.by_class.get(&class) {
                Some(pool) => {
                    let j = pool[rng.below(pool.len())];
                    x_t.row_mut(r).copy_from_slice(self.target.features().row(j));
                    valid_t.push(true);
                }
                None => valid_t.push(false),
            }
        }
        let n = rows.len();
        PairBatch {
            x_s,
            x_t,
            class_labels: labels,
            valid_s: vec![true; n],
            valid_t,
        }
    }
}

/// One-shot form of [`PairSampler::sample`].
pub fn sample_pairs(task: &GzsdaTask, order: &[usize], start: usize, batch_size: usize, rng: &mut Rng) -> Result<PairBatch> {
    Ok(PairSampler::for_task(task)?.sample(order, start, batch_size, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_task, Domain, SplitSpec};

    fn task() -> GzsdaTask {
        // class c, record r has features (c, r) so partners can be identified.
        let mk = |domain| {
            let mut rows = Vec::new();
            let mut labels = Vec::new();
            for c in 0..4 {
                for r in 0..8 {
                    rows.push([c as f64, r as f64 + if domain == Domain::Target { 100.0 } else { 0.0 }]);
                    labels.push(c);
                }
            }
            FeatureDataset::single_domain(Matrix::from_rows(&rows), labels, domain).unwrap()
        };
        let split = SplitSpec::new([0, 1], [2, 3], 0.5, 5).unwrap();
        make_task(&mk(Domain::Source), &mk(Domain::Target), &split).unwrap()
    }

    #[test]
    fn seen_rows_pair_within_class() {
        let t = task();
        let sampler = PairSampler::for_task(&t).unwrap();
        let order = t.source_train.indices_of_class(1);
        let b = sampler.sample(&order, 0, 64, &mut Rng::new(0));
        assert_eq!(b.len(), 8);
        assert!(b.valid_t.iter().all(|&v| v));
        for i in 0..b.len() {
            assert_eq!(b.x_t.get(i, 0), 1.0);
            assert!(b.x_t.get(i, 1) >= 100.0);
        }
    }

    #[test]
    fn unseen_rows_get_dummies() {
        let t = task();
        let order = t.source_train.indices_of_class(3);
        let b = sample_pairs(&t, &order, 0, 5, &mut Rng::new(0)).unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.valid_t.iter().all(|&v| !v));
        assert!(b.x_t.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_is_clipped_at_the_end() {
        let t = task();
        let order: Vec<usize> = (0..t.source_train.len()).collect();
        let b = sample_pairs(&t, &order, 30, 64, &mut Rng::new(0)).unwrap();
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn padding_row_is_fully_masked() {
        let mut b = PairBatch::new(Matrix::zeros(0, 3), Matrix::zeros(0, 3), vec![], vec![]).unwrap();
        b.push(&[1.0, 2.0, 3.0], Some(&[4.0, 5.0, 6.0]), 2).unwrap();
        b.push(&[1.0, 2.0, 3.0], None, 1).unwrap();
        b.push_padding();
        assert_eq!(b.valid_source_rows(), vec![0, 1]);
        assert_eq!(b.valid_pair_rows(), vec![0]);
        assert!(b.x_t.row(1).iter().all(|&v| v == 0.0));
    }
}
