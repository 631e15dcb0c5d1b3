use super::loss::reparameterize;
use super::model::CcvaeModel;
use crate::data::{Domain, FeatureDataset};
use crate::error::{Error, Result};
use crate::nn::{Matrix, Rng};

/// Encodes `x` under `from`, draws `z` (or takes `μ` when `deterministic_mu`)
/// and decodes under `to`. Row `i` of the output keeps row `i`'s label.
///
/// Nothing checks that the model was trained; an untrained model simply
/// produces noise.
pub fn generate_cross_domain(
    model: &CcvaeModel,
    x: &Matrix,
    from: Domain,
    to: Domain,
    rng: &mut Rng,
    deterministic_mu: bool,
) -> Result<Matrix> {
    let (mu, logvar) = model.encode(x, from)?;
    let z = if deterministic_mu {
        mu
    } else {
        reparameterize(&mu, &logvar, rng)?
    };
    model.decode(&z, to)
}

/// For each class in `classes`, draws `per_class` rows of that class from
/// `inputs` uniformly with replacement and translates them from `from` to
/// `to`. Classes absent from `inputs` yield an error.
#[allow(clippy::too_many_arguments)]
pub fn generate_for_classes(
    model: &CcvaeModel,
    inputs: &FeatureDataset,
    classes: &[usize],
    per_class: usize,
    from: Domain,
    to: Domain,
    rng: &mut Rng,
    deterministic_mu: bool,
) -> Result<(Matrix, Vec<usize>)> {
    let mut picks = Vec::with_capacity(classes.len() * per_class);
    let mut labels = Vec::with_capacity(classes.len() * per_class);
    for &c in classes {
        let pool = inputs.indices_of_class(c);
        if pool.is_empty() && per_class > 0 {
            return Err(Error::EmptySet(format!("no input records of class {c} to generate from")));
        }
        for _ in 0..per_class {
            picks.push(pool[rng.below(pool.len())]);
            labels.push(c);
        }
    }
    let x = inputs.features().gather_rows(&picks);
    if x.rows() == 0 {
        return Ok((Matrix::zeros(0, model.feature_dim()), labels));
    }
    let out = generate_cross_domain(model, &x, from, to, rng, deterministic_mu)?;
    Ok((out, labels))
}
