//! Reparameterized sampling, the Gaussian KL term and the coupled loss.

use serde::{Deserialize, Serialize};

use super::model::{with_condition, CcvaeModel};
use crate::data::{Domain, PairBatch};
use crate::error::{Error, Result};
use crate::nn::{Matrix, Rng};

/// `z = μ + exp(½·log σ²) ⊙ ε`, `ε ~ N(0, I)`.
pub fn reparameterize(mu: &Matrix, logvar: &Matrix, rng: &mut Rng) -> Result<Matrix> {
    let eps = rng.normal_matrix(mu.rows(), mu.cols());
    reparameterize_with(mu, logvar, &eps)
}

pub fn reparameterize_with(mu: &Matrix, logvar: &Matrix, eps: &Matrix) -> Result<Matrix> {
    if mu.shape() != logvar.shape() || mu.shape() != eps.shape() {
        return Err(Error::Dimension {
            op: "reparameterize",
            left: mu.shape(),
            right: logvar.shape(),
        });
    }
    let data = mu
        .data()
        .iter()
        .zip(logvar.data())
        .zip(eps.data())
        .map(|((m, lv), e)| m + (0.5 * lv).exp() * e)
        .collect();
    Matrix::from_vec(mu.rows(), mu.cols(), data)
}

/// `KL(N(μ, diag σ²) ‖ N(0, I))` for one row.
pub fn kl_row(mu: &[f64], logvar: &[f64]) -> f64 {
    0.5 * mu
        .iter()
        .zip(logvar)
        .map(|(m, lv)| m * m + lv.exp() - lv - 1.0)
        .sum::<f64>()
}

/// Mean over rows of the per-sample KL to the standard normal.
pub fn kl_divergence(mu: &Matrix, logvar: &Matrix) -> Result<f64> {
    if mu.shape() != logvar.shape() {
        return Err(Error::Dimension {
            op: "kl_divergence",
            left: mu.shape(),
            right: logvar.shape(),
        });
    }
    if mu.rows() == 0 {
        return Ok(0.0);
    }
    let total: f64 = (0..mu.rows()).map(|i| kl_row(mu.row(i), logvar.row(i))).sum();
    Ok(total / mu.rows() as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Source input vs. its source-conditioned reconstruction.
    pub recon_s: f64,
    /// Target input vs. its target-conditioned reconstruction.
    pub recon_t: f64,
    /// Target input vs. the source code decoded as target.
    pub cross_st: f64,
    /// Source input vs. the target code decoded as source.
    pub cross_ts: f64,
    pub kl: f64,
    pub lambda: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn recompute_total(&self) -> f64 {
        (self.recon_s + self.recon_t) + (self.cross_st + self.cross_ts) + self.lambda * self.kl
    }

    pub(crate) fn add_scaled(&mut self, other: &LossBreakdown, w: f64) {
        self.recon_s += w * other.recon_s;
        self.recon_t += w * other.recon_t;
        self.cross_st += w * other.cross_st;
        self.cross_ts += w * other.cross_ts;
        self.kl += w * other.kl;
        self.lambda += w * other.lambda;
        self.total += w * other.total;
    }
}

/// Sum of squared row differences over `rows` of `out` against `target`,
/// scaled by `weight`; writes `2·weight·(out − target)` into `grad`.
fn l2_block(out: &Matrix, target: &Matrix, rows: std::ops::Range<usize>, weight: f64, grad: &mut Matrix) -> f64 {
    let mut sum = 0.0;
    for (t, i) in rows.enumerate() {
        let o = out.row(i);
        let g = grad.row_mut(i);
        for ((gv, ov), tv) in g.iter_mut().zip(o).zip(target.row(t)) {
            let diff = ov - tv;
            sum += diff * diff;
            *gv = 2.0 * weight * diff;
        }
    }
    weight * sum
}

/// The coupled loss on one batch, accumulating its gradient into the
/// model's parameters.
///
/// Each valid source row is encoded under the source condition and each
/// valid pair's target row under the target condition; every encoding draws
/// one `z`, reused for its within-domain and cross-domain decodes. The L2
/// terms are per-row sums of squared differences averaged over the rows that
/// take part: all valid source rows for `recon_s`, valid pairs for the other
/// three. The KL term averages the per-sample KL over both sets of
/// encodings. Noise is drawn target rows first, then source rows, so rows
/// appended to a batch never change the draws of earlier rows.
pub fn ccvae_loss(model: &mut CcvaeModel, batch: &PairBatch, lambda: f64, rng: &mut Rng) -> Result<LossBreakdown> {
    let d = model.feature_dim();
    let l = model.latent_dim();
    if batch.feature_dim() != d {
        return Err(Error::Dimension {
            op: "ccvae_loss",
            left: batch.x_s.shape(),
            right: (batch.len(), d),
        });
    }
    let src_rows = batch.valid_source_rows();
    let pair_rows = batch.valid_pair_rows();
    if src_rows.is_empty() {
        return Err(Error::EmptySet("ccvae_loss: batch has no valid source rows".into()));
    }
    let ns = src_rows.len();
    let nt = pair_rows.len();
    // Position of each paired row within the source block.
    let paired_in_src: Vec<usize> = pair_rows
        .iter()
        .map(|r| src_rows.binary_search(r).expect("valid pair implies valid source"))
        .collect();

    let xs = batch.x_s.gather_rows(&src_rows);
    let xt = batch.x_t.gather_rows(&pair_rows);
    let xs_paired = batch.x_s.gather_rows(&pair_rows);

    // Encode [source; target] in one pass.
    let enc_in = Matrix::vcat(&[&with_condition(&xs, Domain::Source)?, &with_condition(&xt, Domain::Target)?])?;
    let (enc_out, enc_cache) = model.encoder.forward(&enc_in)?;
    let (mu, logvar) = enc_out.split_cols(l);

    let eps_t = rng.normal_matrix(nt, l);
    let eps_s = rng.normal_matrix(ns, l);
    let eps = Matrix::vcat(&[&eps_s, &eps_t])?;
    let z = reparameterize_with(&mu, &logvar, &eps)?;
    let z_s = z.slice_rows(0, ns);
    let z_t = z.slice_rows(ns, ns + nt);
    let z_s_paired = z_s.gather_rows(&paired_in_src);

    // Decode blocks: x̃ˢ, x̃ᵗ, x̃ˢᵗ, x̃ᵗˢ.
    let dec_in = Matrix::vcat(&[
        &with_condition(&z_s, Domain::Source)?,
        &with_condition(&z_t, Domain::Target)?,
        &with_condition(&z_s_paired, Domain::Target)?,
        &with_condition(&z_t, Domain::Source)?,
    ])?;
    let (out, dec_cache) = model.decoder.forward(&dec_in)?;
    let mut dout = Matrix::zeros(out.rows(), d);
    let ws = 1.0 / ns as f64;
    let wt = if nt > 0 { 1.0 / nt as f64 } else { 0.0 };
    let b1 = ns;
    let b2 = b1 + nt;
    let b3 = b2 + nt;
    let b4 = b3 + nt;
    let recon_s = l2_block(&out, &xs, 0..b1, ws, &mut dout);
    let recon_t = l2_block(&out, &xt, b1..b2, wt, &mut dout);
    let cross_st = l2_block(&out, &xt, b2..b3, wt, &mut dout);
    let cross_ts = l2_block(&out, &xs_paired, b3..b4, wt, &mut dout);

    let n_enc = ns + nt;
    let kl_sum: f64 = (0..n_enc).map(|i| kl_row(mu.row(i), logvar.row(i))).sum();
    let kl = kl_sum / n_enc as f64;

    let breakdown = LossBreakdown {
        recon_s,
        recon_t,
        cross_st,
        cross_ts,
        kl,
        lambda,
        total: (recon_s + recon_t) + (cross_st + cross_ts) + lambda * kl,
    };

    // Back through the decoder, then route ∂/∂z to the encodings that made it.
    let dz_in = model.decoder.backward(&dec_cache, &dout)?;
    let (dz_all, _) = dz_in.split_cols(l);
    let mut dz = Matrix::zeros(n_enc, l);
    for i in 0..ns {
        dz.row_mut(i).copy_from_slice(dz_all.row(i));
    }
    for (j, &s) in paired_in_src.iter().enumerate() {
        let t = ns + j;
        for k in 0..l {
            let from_recon = dz_all.get(b1 + j, k);
            let from_cross = dz_all.get(b3 + j, k);
            dz.set(t, k, from_recon + from_cross);
            dz.set(s, k, dz.get(s, k) + dz_all.get(b2 + j, k));
        }
    }

    let c = lambda / n_enc as f64;
    let mut denc = Matrix::zeros(n_enc, 2 * l);
    for i in 0..n_enc {
        for k in 0..l {
            let m = mu.get(i, k);
            let lv = logvar.get(i, k);
            let g = dz.get(i, k);
            let std = (0.5 * lv).exp();
            denc.set(i, k, g + c * m);
            denc.set(i, l + k, g * eps.get(i, k) * 0.5 * std + c * 0.5 * (lv.exp() - 1.0));
        }
    }
    model.encoder.backward(&enc_cache, &denc)?;
    Ok(breakdown)
}
