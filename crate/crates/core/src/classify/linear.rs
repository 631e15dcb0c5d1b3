use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::TrainSetForClassifier;
use crate::error::{Error, Result};
use crate::nn::{
    argmax_rows, decode_checkpoint, encode_checkpoint, fill_parameters, softmax_cross_entropy, Adam, AdamConfig, Matrix,
    Parameter, Parameterized, Rng,
};

pub const LINEAR_MAGIC: &[u8] = b"LINC1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub adam: AdamConfig,
    /// Standardize each input dimension with training-set statistics.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            adam: AdamConfig::with_lr(1e-2),
            standardize: false,
            seed: 0,
        }
    }
}

/// Per-dimension affine normalization `(x − mean) / std`.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Matrix,
    pub std: Matrix,
}

impl Standardizer {
    /// Dimensions with zero spread keep unit scale.
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let mut mean = x.sum_rows();
        mean.scale(1.0 / n);
        let mut var = Matrix::zeros(1, x.cols());
        for i in 0..x.rows() {
            for (j, v) in x.row(i).iter().enumerate() {
                let d = v - mean.get(0, j);
                var.set(0, j, var.get(0, j) + d * d);
            }
        }
        let std = var.map(|v| {
            let s = (v / n).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        });
        Self { mean, std }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean.get(0, j)) / self.std.get(0, j);
            }
        }
        out
    }
}

/// One affine map from features to class logits.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub weights: Parameter,
    pub bias: Parameter,
    pub standardizer: Option<Standardizer>,
}

impl LinearClassifier {
    pub fn zeros(feature_dim: usize, num_classes: usize) -> Self {
        Self {
            weights: Parameter::new("classifier.weight", Matrix::zeros(feature_dim, num_classes)),
            bias: Parameter::new("classifier.bias", Matrix::zeros(1, num_classes)),
            standardizer: None,
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.value.rows()
    }

    pub fn num_classes(&self) -> usize {
        self.weights.value.cols()
    }

    fn check_dim(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.feature_dim() {
            return Err(Error::Dimension {
                op: "classifier",
                left: x.shape(),
                right: self.weights.value.shape(),
            });
        }
        Ok(())
    }

    fn prepare(&self, x: &Matrix) -> Matrix {
        match &self.standardizer {
            Some(s) => s.apply(x),
            None => x.clone(),
        }
    }

    fn raw_logits(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = x.matmul(&self.weights.value)?;
        out.add_row(&self.bias.value)?;
        Ok(out)
    }

    pub fn logits(&self, x: &Matrix) -> Result<Matrix> {
        self.check_dim(x)?;
        self.raw_logits(&self.prepare(x))
    }

    /// Argmax class per row, ties to the lowest class id.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.logits(x)?))
    }

    pub fn to_bytes(&self, config: &Value) -> Result<Vec<u8>> {
        let header = json!({
            "config": config,
            "feature_dim": self.feature_dim(),
            "num_classes": self.num_classes(),
            "standardized": self.standardizer.is_some(),
        });
        let extra = self
            .standardizer
            .as_ref()
            .map(|s| (Parameter::new("mean", s.mean.clone()), Parameter::new("std", s.std.clone())));
        let mut params = vec![&self.weights, &self.bias];
        if let Some((m, s)) = &extra {
            params.push(m);
            params.push(s);
        }
        encode_checkpoint(LINEAR_MAGIC, &header, params)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, Value)> {
        let (mut header, payload) = decode_checkpoint(LINEAR_MAGIC, bytes)?;
        let field = |k: &str| {
            header
                .get(k)
                .and_then(Value::as_u64)
                .map(|v| v as usize)
                .ok_or_else(|| Error::Header(format!("missing or invalid `{k}`")))
        };
        let d = field("feature_dim")?;
        let c = field("num_classes")?;
        let standardized = header.get("standardized").and_then(Value::as_bool).unwrap_or(false);
        let mut model = Self::zeros(d, c);
        let mut mean = Parameter::new("mean", Matrix::zeros(1, d));
        let mut std = Parameter::new("std", Matrix::zeros(1, d));
        if standardized {
            fill_parameters(payload, [&mut model.weights, &mut model.bias, &mut mean, &mut std])?;
            model.standardizer = Some(Standardizer {
                mean: mean.value,
                std: std.value,
            });
        } else {
            fill_parameters(payload, [&mut model.weights, &mut model.bias])?;
        }
        let config = header.get_mut("config").map(Value::take).unwrap_or(Value::Null);
        Ok((model, config))
    }

    pub fn save(&self, config: &Value, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes(config)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<(Self, Value)> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

impl Parameterized for LinearClassifier {
    fn parameters(&self) -> Vec<&Parameter> {
        vec![&self.weights, &self.bias]
    }

    fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        vec![&mut self.weights, &mut self.bias]
    }
}

/// Full-batch Adam on mean softmax cross-entropy. Returns the classifier and
/// the loss measured before each epoch's update.
pub fn train_linear(
    train: &TrainSetForClassifier,
    num_classes: usize,
    config: &ClassifierConfig,
) -> Result<(LinearClassifier, Vec<f64>)> {
    if train.is_empty() {
        return Err(Error::EmptySet("classifier training set".into()));
    }
    if let Some(&label) = train.labels.iter().find(|&&y| y >= num_classes) {
        return Err(Error::LabelOutOfRange { label, num_classes });
    }
    let d = train.feature_dim();
    let mut model = LinearClassifier::zeros(d, num_classes);
    let bound = (6.0 / (d + num_classes) as f64).sqrt();
    model.weights.value = Rng::new(config.seed).uniform_matrix(d, num_classes, -bound, bound);
    let x = if config.standardize {
        let s = Standardizer::fit(&train.features);
        let x = s.apply(&train.features);
        model.standardizer = Some(s);
        x
    } else {
        train.features.clone()
    };
    let mut adam = Adam::new(config.adam.clone())?;
    let mut losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let logits = model.raw_logits(&x)?;
        let (loss, dlogits) = softmax_cross_entropy(&logits, &train.labels)?;
        model.weights.grad = x.t_matmul(&dlogits)?;
        model.bias.grad = dlogits.sum_rows();
        adam.step(model.parameters_mut())?;
        losses.push(loss);
    }
    Ok((model, losses))
}
