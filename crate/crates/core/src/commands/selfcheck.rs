use serde::{Deserialize, Serialize};

use crate::ccvae::{ccvae_loss, kl_divergence, kl_row, train, CcvaeDims, CcvaeModel, TrainConfig, WarmupSchedule};
use crate::classify::LinearClassifier;
use crate::data::{Domain, FeatureDataset, PairBatch};
use crate::error::Result;
use crate::nn::{grad_check, softmax_cross_entropy, AdamConfig, GradCheckOptions, Matrix, Mlp, Parameterized, Rng};

#[derive(Debug, Clone, Default)]
pub struct SelfcheckOptions {
    /// Corrupts the analytic CCVAE gradient so the gradient check must fail.
    pub perturb_gradient: bool,
    /// Monte-Carlo samples per row for the KL check.
    pub kl_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfcheckReport {
    pub checks: Vec<Check>,
    /// Largest relative error of the CCVAE gradient check.
    pub max_grad_rel_error: f64,
}

impl SelfcheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("[{}] {}: {}\n", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail));
        }
        out.push_str(&format!("max relative gradient error (ccvae): {:.3e}\n", self.max_grad_rel_error));
        out
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

/// The gradient-check batch: four rows, the third with a dummy target.
pub fn tiny_ccvae_case(seed: u64) -> (CcvaeModel, PairBatch) {
    let mut rng = Rng::new(seed);
    let dims = CcvaeDims {
        feature_dim: 8,
        hidden: vec![6],
        latent_dim: 3,
    };
    let model = CcvaeModel::new(dims, &mut rng).expect("valid dims");
    let xs = rng.normal_matrix(4, 8);
    let xt = rng.normal_matrix(4, 8);
    let batch = PairBatch::new(xs, xt, vec![0, 1, 2, 1], vec![true, true, false, true]).expect("aligned");
    (model, batch)
}

/// Monte-Carlo estimate of `E_q[log q(z) − log p(z)]` for one diagonal
/// Gaussian row.
pub fn kl_monte_carlo(mu: &[f64], logvar: &[f64], samples: usize, rng: &mut Rng) -> f64 {
    let mut sum = 0.0;
    for _ in 0..samples {
        let mut s = 0.0;
        for (m, lv) in mu.iter().zip(logvar) {
            let e = rng.normal();
            let z = m + (0.5 * lv).exp() * e;
            // log q − log p; the 2π terms cancel.
            s += -0.5 * lv - 0.5 * e * e + 0.5 * z * z;
        }
        sum += s;
    }
    sum / samples as f64
}

pub fn run_selfcheck(opts: &SelfcheckOptions) -> Result<SelfcheckReport> {
    let mut checks = Vec::new();
    let gc = GradCheckOptions::default();

    let mut rng = Rng::new(11);
    let mut mlp = Mlp::new("mlp", &[5, 7, 4, 3], &mut rng)?;
    let x = rng.normal_matrix(6, 5);
    let dir = rng.normal_matrix(6, 3);
    let r = grad_check(
        &mut mlp,
        |m: &mut Mlp| {
            let (out, cache) = m.forward(&x)?;
            m.backward(&cache, &dir)?;
            Ok(out.data().iter().zip(dir.data()).map(|(a, b)| a * b).sum())
        },
        &gc,
    )?;
    checks.push(check("mlp gradient", r.passes(1e-6), format!("max rel error {:.3e} over {} coords", r.max_rel_error, r.checked)));

    let mut clf = LinearClassifier::zeros(4, 3);
    clf.weights.value = rng.normal_matrix(4, 3);
    clf.bias.value = rng.normal_matrix(1, 3);
    let xc = rng.normal_matrix(7, 4);
    let labels: Vec<usize> = (0..7).map(|i| i % 3).collect();
    let r = grad_check(
        &mut clf,
        |c: &mut LinearClassifier| {
            let logits = c.logits(&xc)?;
            let (loss, g) = softmax_cross_entropy(&logits, &labels)?;
            c.weights.grad.add_assign(&xc.t_matmul(&g)?)?;
            c.bias.grad.add_assign(&g.sum_rows())?;
            Ok(loss)
        },
        &gc,
    )?;
    checks.push(check(
        "softmax cross-entropy gradient",
        r.passes(1e-6),
        format!("max rel error {:.3e} over {} coords", r.max_rel_error, r.checked),
    ));

    let (mut model, batch) = tiny_ccvae_case(3);
    let perturb = opts.perturb_gradient;
    let r = grad_check(
        &mut model,
        |m: &mut CcvaeModel| {
            let loss = ccvae_loss(m, &batch, 0.2, &mut Rng::new(5))?.total;
            if perturb {
                let p = &mut m.parameters_mut()[0];
                p.grad = p.grad.map(|g| g * 1.01 + 1e-3);
            }
            Ok(loss)
        },
        &gc,
    )?;
    let max_grad_rel_error = r.max_rel_error;
    checks.push(check(
        "ccvae loss gradient",
        r.passes(1e-4) && r.checked == model.num_parameters(),
        format!(
            "max rel error {:.3e} at {} over {} coords",
            r.max_rel_error,
            r.worst.unwrap_or_default(),
            r.checked
        ),
    ));

    let zero = kl_divergence(&Matrix::zeros(2, 3), &Matrix::zeros(2, 3))?;
    checks.push(check("kl at the prior", zero == 0.0, format!("KL(N(0,I)||N(0,I)) = {zero}")));

    let samples = if opts.kl_samples == 0 { 200_000 } else { opts.kl_samples };
    let mut worst = 0.0f64;
    let mut negative = false;
    for _ in 0..5 {
        let mu: Vec<f64> = (0..3).map(|_| rng.uniform_range(-1.5, 1.5)).collect();
        let lv: Vec<f64> = (0..3).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let exact = kl_row(&mu, &lv);
        negative |= exact < 0.0;
        let mc = kl_monte_carlo(&mu, &lv, samples, &mut rng);
        worst = worst.max((mc - exact).abs() / exact);
    }
    checks.push(check(
        "kl closed form vs monte carlo",
        worst < 0.02 && !negative,
        format!("worst relative gap {worst:.4} with {samples} samples"),
    ));

    let schedule = WarmupSchedule::for_training(0.2, 0.2, 100);
    let lambdas: Vec<f64> = (0..100).map(|s| schedule.lambda(s)).collect();
    let monotone = lambdas.windows(2).all(|w| w[1] >= w[0]);
    checks.push(check(
        "warm-up schedule",
        lambdas[0] == 0.0 && monotone && lambdas[99] == 0.2,
        format!("λ from {} to {} over {} steps", lambdas[0], lambdas[99], lambdas.len()),
    ));

    let (model, mut padded) = tiny_ccvae_case(4);
    let mut a = model.clone();
    let la = ccvae_loss(&mut a, &padded, 0.2, &mut Rng::new(9))?;
    padded.push_padding();
    let mut b = model;
    let lb = ccvae_loss(&mut b, &padded, 0.2, &mut Rng::new(9))?;
    let same_grads = a
        .parameters()
        .iter()
        .zip(b.parameters())
        .all(|(p, q)| p.grad.data().iter().zip(q.grad.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    checks.push(check(
        "padding row exclusion",
        la == lb && same_grads,
        "loss breakdown and gradients compared bitwise".into(),
    ));

    let src = FeatureDataset::single_domain(rng.normal_matrix(24, 4), (0..24).map(|i| i % 3).collect(), Domain::Source)?;
    let tgt = FeatureDataset::single_domain(rng.normal_matrix(8, 4), (0..8).map(|i| i % 2).collect(), Domain::Target)?;
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 8,
        adam: AdamConfig::with_lr(1e-2),
        seed: 21,
        ..TrainConfig::default()
    };
    let dims = CcvaeDims {
        feature_dim: 4,
        hidden: vec![5],
        latent_dim: 2,
    };
    let mut runs = Vec::new();
    for _ in 0..2 {
        let mut m = CcvaeModel::new(dims.clone(), &mut Rng::new(2))?;
        let h = train(&mut m, &src, &tgt, &cfg)?;
        let values: Vec<Matrix> = m.parameters().iter().map(|p| p.value.clone()).collect();
        runs.push((h, values));
    }
    checks.push(check(
        "training determinism",
        runs[0] == runs[1],
        "two seeded runs compared bitwise".into(),
    ));

    Ok(SelfcheckReport {
        checks,
        max_grad_rel_error,
    })
}
