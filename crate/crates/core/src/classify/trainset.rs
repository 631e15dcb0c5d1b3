use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{Domain, FeatureDataset};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Where a classifier training row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    RealSource,
    RealTarget,
    SynthTarget,
    SynthSource,
}

impl Provenance {
    pub fn real(domain: Domain) -> Self {
        match domain {
            Domain::Source => Provenance::RealSource,
            Domain::Target => Provenance::RealTarget,
        }
    }

    pub fn synthetic(domain: Domain) -> Self {
        match domain {
            Domain::Source => Provenance::SynthSource,
            Domain::Target => Provenance::SynthTarget,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::RealSource => "real_source",
            Provenance::RealTarget => "real_target",
            Provenance::SynthTarget => "synth_target",
            Provenance::SynthSource => "synth_source",
        }
    }
}

/// Classifier training rows, each tagged with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSetForClassifier {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub provenance: Vec<Provenance>,
}

impl TrainSetForClassifier {
    pub fn empty(feature_dim: usize) -> Self {
        Self {
            features: Matrix::zeros(0, feature_dim),
            labels: Vec::new(),
            provenance: Vec::new(),
        }
    }

    /// Real records of any number of datasets, tagged by their domain.
    pub fn from_real(parts: &[&FeatureDataset]) -> Result<Self> {
        let d = parts.first().map(|p| p.feature_dim()).unwrap_or(0);
        let mut set = Self::empty(d);
        for p in parts {
            let tags = p.domains().iter().map(|&dom| Provenance::real(dom)).collect();
            set.append(p.features(), p.labels(), tags)?;
        }
        Ok(set)
    }

    pub fn extend(&mut self, features: &Matrix, labels: &[usize], tag: Provenance) -> Result<()> {
        self.append(features, labels, vec![tag; labels.len()])
    }

    fn append(&mut self, features: &Matrix, labels: &[usize], tags: Vec<Provenance>) -> Result<()> {
        if features.rows() != labels.len() {
            return Err(Error::Dimension {
                op: "TrainSetForClassifier::extend",
                left: features.shape(),
                right: (labels.len(), 1),
            });
        }
        if features.rows() == 0 {
            return Ok(());
        }
        self.features = Matrix::vcat(&[&self.features, features])?;
        self.labels.extend_from_slice(labels);
        self.provenance.extend(tags);
        Ok(())
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

    pub fn counts(&self) -> BTreeMap<Provenance, usize> {
        let mut out = BTreeMap::new();
        for &p in &self.provenance {
            *out.entry(p).or_insert(0) += 1;
        }
        out
    }
}
