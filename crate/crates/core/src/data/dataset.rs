use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Source = 0,
    Target = 1,
}

impl Domain {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: u64) -> Option<Domain> {
        match i {
            0 => Some(Domain::Source),
            1 => Some(Domain::Target),
            _ => None,
        }
    }

    pub fn one_hot(self) -> [f64; 2] {
        match self {
            Domain::Source => [1.0, 0.0],
            Domain::Target => [0.0, 1.0],
        }
    }

    pub fn other(self) -> Domain {
        match self {
            Domain::Source => Domain::Target,
            Domain::Target => Domain::Source,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Source => "source",
            Domain::Target => "target",
        })
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" | "s" | "0" => Ok(Domain::Source),
            "target" | "t" | "1" => Ok(Domain::Target),
            other => Err(Error::Config(format!("unknown domain `{other}`"))),
        }
    }
}

/// Feature vectors with class and domain labels, one record per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    features: Matrix,
    labels: Vec<usize>,
    domains: Vec<Domain>,
}

impl FeatureDataset {
    pub fn empty(feature_dim: usize) -> Self {
        Self {
            features: Matrix::zeros(0, feature_dim),
            labels: Vec::new(),
            domains: Vec::new(),
        }
    }

    pub fn new(features: Matrix, labels: Vec<usize>, domains: Vec<Domain>) -> Result<Self> {
        if labels.len() != features.rows() || domains.len() != features.rows() {
            return Err(Error::Dimension {
                op: "FeatureDataset::new",
                left: features.shape(),
                right: (labels.len(), domains.len()),
            });
        }
        Ok(Self {
            features,
            labels,
            domains,
        })
    }

    /// All records in one domain.
    pub fn single_domain(features: Matrix, labels: Vec<usize>, domain: Domain) -> Result<Self> {
        let n = labels.len();
        Self::new(features, labels, vec![domain; n])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn classes(&self) -> BTreeSet<usize> {
        self.labels.iter().copied().collect()
    }

    /// One past the largest label, or 0 when empty.
    pub fn label_bound(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn indices_of_class(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == class).then_some(i))
            .collect()
    }

    pub fn subset(&self, idx: &[usize]) -> FeatureDataset {
        FeatureDataset {
            features: self.features.gather_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            domains: idx.iter().map(|&i| self.domains[i]).collect(),
        }
    }

    pub fn push(&mut self, features: &[f64], label: usize, domain: Domain) -> Result<()> {
        if features.len() != self.feature_dim() {
            return Err(Error::Dimension {
                op: "FeatureDataset::push",
                left: (1, features.len()),
                right: (0, self.feature_dim()),
            });
        }
        let row = Matrix::from_rows(&[features]);
        self.features = Matrix::vcat(&[&self.features, &row])?;
        self.labels.push(label);
        self.domains.push(domain);
        Ok(())
    }

    /// Concatenates datasets of equal dimension.
    pub fn concat(parts: &[&FeatureDataset]) -> Result<FeatureDataset> {
        let mats: Vec<&Matrix> = parts.iter().map(|d| &d.features).collect();
        Ok(FeatureDataset {
            features: Matrix::vcat(&mats)?,
            labels: parts.iter().flat_map(|d| d.labels.iter().copied()).collect(),
            domains: parts.iter().flat_map(|d| d.domains.iter().copied()).collect(),
        })
    }

    pub fn check_labels(&self, num_classes: usize) -> Result<()> {
        match self.labels.iter().find(|&&l| l >= num_classes) {
            Some(&label) => Err(Error::LabelOutOfRange { label, num_classes }),
            None => Ok(()),
        }
    }
}
