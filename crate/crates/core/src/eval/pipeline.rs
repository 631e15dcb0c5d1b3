use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::metrics::{harmonic_summary, per_class_accuracy};
use crate::ccvae::{generate_for_classes, train, CcvaeModel, ModelConfig, TrainConfig, TrainHistory};
use crate::classify::{knn_predict, train_linear, ClassifierConfig, Provenance, TrainSetForClassifier};
use crate::data::{Domain, GzsdaTask};
use crate::error::{Error, Result};
use crate::nn::{derive_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SourceOnly,
    #[serde(rename = "baseline_1nn")]
    Baseline1nn,
    BaselineNn,
    Ccvae,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::SourceOnly, Method::Baseline1nn, Method::BaselineNn, Method::Ccvae];

    /// Identifier used in file names and configs.
    pub fn key(self) -> &'static str {
        match self {
            Method::SourceOnly => "source_only",
            Method::Baseline1nn => "baseline_1nn",
            Method::BaselineNn => "baseline_nn",
            Method::Ccvae => "ccvae",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::SourceOnly => "Source-Only",
            Method::Baseline1nn => "Baseline(1NN)",
            Method::BaselineNn => "Baseline(NN)",
            Method::Ccvae => "CCVAE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// How many synthetic rows the CCVAE method adds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetPolicy {
    /// Rows per class; `None` uses the median per-class count of the
    /// labelled target training set.
    pub per_class: Option<usize>,
    /// Also add source→source reconstructions for every class.
    pub source_augmentation: bool,
}

impl Default for BudgetPolicy {
    fn default() -> Self {
        Self {
            per_class: None,
            source_augmentation: true,
        }
    }
}

/// Settings shared by every method of one evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub classifier: ClassifierConfig,
    pub budget: BudgetPolicy,
    /// Decode `μ` instead of a sampled code when generating.
    pub deterministic_mu: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub split_id: usize,
    pub per_class_acc: BTreeMap<usize, f64>,
    pub acc_seen: f64,
    pub acc_unseen: f64,
    pub h: f64,
    pub seen_classes: Vec<usize>,
    pub unseen_classes: Vec<usize>,
    pub missing_classes: Vec<usize>,
    /// Classifier or 1NN training rows by provenance.
    pub train_counts: BTreeMap<Provenance, usize>,
    pub num_test: usize,
    /// Total CCVAE loss averaged over the last training epoch.
    pub final_ccvae_loss: Option<f64>,
    pub seed: u64,
    pub config: Value,
}

/// Median of per-class counts; the lower middle for an even number of classes.
pub(crate) fn median_count(counts: &[usize]) -> usize {
    if counts.is_empty() {
        return 0;
    }
    let mut c = counts.to_vec();
    c.sort_unstable();
    c[(c.len() - 1) / 2]
}

fn seen_target_budget(task: &GzsdaTask) -> usize {
    let counts: Vec<usize> = task
        .split
        .seen
        .iter()
        .map(|&c| task.target_train.indices_of_class(c).len())
        .collect();
    median_count(&counts)
}

pub fn method_seed(split_seed: u64, method: Method) -> u64 {
    derive_seed(split_seed, method.key(), 0)
}

/// Initializes and trains the CCVAE of the `ccvae` method on `task`, with
/// the same seeds [`run_method`] uses for split seed `seed`.
pub fn train_ccvae(task: &GzsdaTask, config: &PipelineConfig, seed: u64) -> Result<(CcvaeModel, TrainHistory)> {
    let method_seed = method_seed(seed, Method::Ccvae);
    let dims = config.model.dims(task.source_train.feature_dim())?;
    let mut model = CcvaeModel::new(dims, &mut Rng::new(derive_seed(method_seed, "ccvae-init", 0)))?;
    let train_cfg = TrainConfig {
        seed: derive_seed(method_seed, "ccvae-train", 0),
        ..config.train.clone()
    };
    let history = train(&mut model, &task.source_train, &task.target_train, &train_cfg)?;
    Ok((model, history))
}

/// Runs one method on one task. `seed` drives every random choice; each
/// method derives its own streams from it.
pub fn run_method(method: Method, task: &GzsdaTask, config: &PipelineConfig, split_id: usize, seed: u64) -> Result<EvalReport> {
    let num_classes = task.num_classes();
    let test = &task.target_test;
    let method_seed = method_seed(seed, method);
    let mut final_ccvae_loss = None;
    let (predictions, train_counts) = match method {
        Method::SourceOnly | Method::Baseline1nn => {
            let set = if method == Method::SourceOnly {
                TrainSetForClassifier::from_real(&[&task.source_train])?
            } else {
                TrainSetForClassifier::from_real(&[&task.source_train, &task.target_train])?
            };
            (knn_predict(&set.features, &set.labels, test.features())?, set.counts())
        }
        Method::BaselineNn => {
            let set = TrainSetForClassifier::from_real(&[&task.source_train, &task.target_train])?;
            let cfg = ClassifierConfig {
                seed: derive_seed(method_seed, "classifier", 0),
                ..config.classifier.clone()
            };
            let (clf, _) = train_linear(&set, num_classes, &cfg)?;
            (clf.predict(test.features())?, set.counts())
        }
        Method::Ccvae => {
            let (model, history) = train_ccvae(task, config, seed)?;
            final_ccvae_loss = history.epochs.last().map(|b| b.total);

            let mut set = TrainSetForClassifier::from_real(&[&task.source_train, &task.target_train])?;
            let budget = config.budget.per_class.unwrap_or_else(|| seen_target_budget(task));
            let mut rng = Rng::new(derive_seed(method_seed, "generate", 0));
            let unseen: Vec<usize> = task.split.unseen.iter().copied().collect();
            let (x, y) = generate_for_classes(
                &model,
                &task.source_train,
                &unseen,
                budget,
                Domain::Source,
                Domain::Target,
                &mut rng,
                config.deterministic_mu,
            )?;
            set.extend(&x, &y, Provenance::SynthTarget)?;
            if config.budget.source_augmentation {
                let all: Vec<usize> = task.source_train.classes().into_iter().collect();
                let (x, y) = generate_for_classes(
                    &model,
                    &task.source_train,
                    &all,
                    budget,
                    Domain::Source,
                    Domain::Source,
                    &mut rng,
                    config.deterministic_mu,
                )?;
                set.extend(&x, &y, Provenance::SynthSource)?;
            }
            let cfg = ClassifierConfig {
                seed: derive_seed(method_seed, "classifier", 0),
                ..config.classifier.clone()
            };
            let (clf, _) = train_linear(&set, num_classes, &cfg)?;
            (clf.predict(test.features())?, set.counts())
        }
    };
    let per_class_acc = per_class_accuracy(&predictions, test.labels())?;
    let summary = harmonic_summary(&per_class_acc, &task.split);
    Ok(EvalReport {
        method,
        split_id,
        per_class_acc,
        acc_seen: summary.acc_seen,
        acc_unseen: summary.acc_unseen,
        h: summary.h,
        seen_classes: task.split.seen.iter().copied().collect(),
        unseen_classes: task.split.unseen.iter().copied().collect(),
        missing_classes: summary.missing_classes,
        train_counts,
        num_test: test.len(),
        final_ccvae_loss,
        seed,
        config: serde_json::to_value(config)?,
    })
}
