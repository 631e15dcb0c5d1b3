use serde::{Deserialize, Serialize};

use super::loss::{ccvae_loss, LossBreakdown};
use super::model::CcvaeModel;
use crate::data::{FeatureDataset, PairSampler};
use crate::error::{Error, Result};
use crate::nn::{Adam, AdamConfig, Parameterized, Rng};

/// Linear KL-weight ramp from 0 to `lambda_max` over `total_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmupSchedule {
    pub lambda_max: f64,
    pub total_steps: usize,
}

impl WarmupSchedule {
    /// Ramp over the first `fraction` of `training_steps` (at least one step).
    pub fn for_training(lambda_max: f64, fraction: f64, training_steps: usize) -> Self {
        let total_steps = ((fraction * training_steps as f64).floor() as usize).max(1);
        Self {
            lambda_max,
            total_steps,
        }
    }

    pub fn lambda(&self, step: usize) -> f64 {
        warmup_lambda(self, step)
    }
}

pub fn warmup_lambda(schedule: &WarmupSchedule, step: usize) -> f64 {
    if step >= schedule.total_steps {
        schedule.lambda_max
    } else {
        schedule.lambda_max * (step as f64 / schedule.total_steps as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub lambda_max: f64,
    /// Share of all training steps spent ramping λ up.
    pub warmup_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 64,
            adam: AdamConfig::default(),
            lambda_max: 0.2,
            warmup_fraction: 0.2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("train.batch_size: must be at least 1".into()));
        }
        if !(self.lambda_max >= 0.0 && self.lambda_max.is_finite()) {
            return Err(Error::Config("train.lambda_max: must be finite and nonnegative".into()));
        }
        if !(self.warmup_fraction > 0.0 && self.warmup_fraction <= 1.0) {
            return Err(Error::Config("train.warmup_fraction: must lie in (0, 1]".into()));
        }
        self.adam.validate()
    }

    pub fn steps_per_epoch(&self, num_source: usize) -> usize {
        num_source.div_ceil(self.batch_size)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Per-epoch means of each loss component over that epoch's steps.
    pub epochs: Vec<LossBreakdown>,
    /// λ used at every optimizer step, in order.
    pub lambdas: Vec<f64>,
}

/// Trains on same-class source/target pairs. Each epoch visits the source
/// set in a fresh shuffled order; every source row of a class with labelled
/// target data is paired with a random target row of that class.
pub fn train(
    model: &mut CcvaeModel,
    source: &FeatureDataset,
    target_seen: &FeatureDataset,
    config: &TrainConfig,
) -> Result<TrainHistory> {
    config.validate()?;
    for (name, ds) in [("source", source), ("target", target_seen)] {
        if ds.feature_dim() != model.feature_dim() {
            return Err(Error::InconsistentDim {
                location: format!("{name} set"),
                expected: model.feature_dim(),
                found: ds.feature_dim(),
            });
        }
    }
    let source_classes = source.classes();
    if let Some(c) = target_seen.classes().iter().find(|c| !source_classes.contains(c)) {
        return Err(Error::Config(format!("target class {c} has no source records")));
    }
    let mut history = TrainHistory::default();
    if config.epochs == 0 {
        return Ok(history);
    }
    if source.is_empty() {
        return Err(Error::EmptySet("source training set".into()));
    }

    let sampler = PairSampler::new(source, target_seen)?;
    let steps_per_epoch = config.steps_per_epoch(source.len());
    let schedule = WarmupSchedule::for_training(config.lambda_max, config.warmup_fraction, config.epochs * steps_per_epoch);
    let root = Rng::new(config.seed);
    let mut order_rng = root.fork("ccvae-order");
    let mut pair_rng = root.fork("ccvae-pairs");
    let mut noise_rng = root.fork("ccvae-noise");
    let mut adam = Adam::new(config.adam.clone())?;
    model.zero_grad();

    let mut step = 0usize;
    for _ in 0..config.epochs {
        let order = order_rng.permutation(source.len());
        let mut sum = LossBreakdown::default();
        for b in 0..steps_per_epoch {
            let batch = sampler.sample(&order, b * config.batch_size, config.batch_size, &mut pair_rng);
            let lambda = schedule.lambda(step);
            let loss = ccvae_loss(model, &batch, lambda, &mut noise_rng)?;
            adam.step(model.parameters_mut())?;
            history.lambdas.push(lambda);
            sum.add_scaled(&loss, 1.0);
            step += 1;
        }
        let mut mean = LossBreakdown::default();
        mean.add_scaled(&sum, 1.0 / steps_per_epoch as f64);
        history.epochs.push(mean);
    }
    Ok(history)
}
