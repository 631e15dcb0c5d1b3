//! Central-difference gradient checking.

use super::{Parameterized, Rng};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GradCheckOptions {
    /// Finite-difference step.
    pub h: f64,
    /// Check at most this many coordinates (sampled without replacement);
    /// `None` checks every coordinate.
    pub max_coords: Option<usize>,
    /// Seed for coordinate sampling.
    pub seed: u64,
    /// Gradient magnitudes below this are compared absolutely.
    pub floor: f64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            h: 1e-5,
            max_coords: None,
            seed: 0,
            floor: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `param[index]` of the worst coordinate.
    pub worst: Option<String>,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares the gradient that `loss` accumulates into `model` against central
/// differences of the value it returns.
///
/// `loss` must run the forward and backward pass and must be a pure function
/// of the parameters: any randomness has to be re-seeded inside the closure.
/// Two evaluations at the unperturbed point that disagree bitwise are
/// reported as [`Error::NonDeterministic`]. On success the model's gradients
/// hold the analytic values.
pub fn grad_check<M, F>(model: &mut M, mut loss: F, opts: &GradCheckOptions) -> Result<GradCheckReport>
where
    M: Parameterized,
    F: FnMut(&mut M) -> Result<f64>,
{
    model.zero_grad();
    let first = loss(model)?;
    let analytic: Vec<Vec<f64>> = model
        .parameters()
        .iter()
        .map(|p| p.grad.data().to_vec())
        .collect();
    model.zero_grad();
    let second = loss(model)?;
    if first.to_bits() != second.to_bits() {
        return Err(Error::NonDeterministic { first, second });
    }

    let mut coords: Vec<(usize, usize)> = analytic
        .iter()
        .enumerate()
        .flat_map(|(p, g)| (0..g.len()).map(move |i| (p, i)))
        .collect();
    if let Some(k) = opts.max_coords {
        if coords.len() > k {
            let mut rng = Rng::new(opts.seed);
            rng.shuffle(&mut coords);
            coords.truncate(k);
            coords.sort_unstable();
        }
    }

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
    };
    for &(p, i) in &coords {
        let orig = model.parameters()[p].value.data()[i];
        model.parameters_mut()[p].value.data_mut()[i] = orig + opts.h;
        let plus = loss(model)?;
        model.parameters_mut()[p].value.data_mut()[i] = orig - opts.h;
        let minus = loss(model)?;
        model.parameters_mut()[p].value.data_mut()[i] = orig;

        let numeric = (plus - minus) / (2.0 * opts.h);
        let err = relative_error(analytic[p][i], numeric, opts.floor);
        if report.worst.is_none() || err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst = Some(format!("{}[{}]", model.parameters()[p].name, i));
        }
        report.checked += 1;
    }

    for (param, g) in model.parameters_mut().into_iter().zip(&analytic) {
        param.grad.data_mut().copy_from_slice(g);
    }
    Ok(report)
}
