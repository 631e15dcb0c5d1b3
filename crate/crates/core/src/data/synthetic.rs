//! Two-domain Gaussian benchmark with a class-independent affine shift.
//!
//! Class means live in a random low-rank subspace of the feature space with
//! pairwise distances of at least `class_separation`. Source samples of class
//! k are `μₖ + σ·ε`; target samples are `A·μₖ + b + σ·ε`, where
//! `A = diag(s)·Q` for a random orthogonal `Q` and per-dimension scales `s`,
//! and `b` is a random offset with `‖b‖ = class_separation`. One map serves
//! every class, so a model that learns it on seen classes can apply it to
//! unseen ones.

use serde::{Deserialize, Serialize};

use super::{Domain, FeatureDataset};
use crate::error::{Error, Result};
use crate::nn::{derive_seed, Matrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainShift {
    /// Random orthogonal rotation, per-dimension scaling and offset.
    Affine,
    /// Identity map, zero offset: both domains share one distribution.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub num_classes: usize,
    pub feature_dim: usize,
    pub samples_per_class_per_domain: usize,
    pub class_separation: f64,
    /// Dimension of the subspace holding the class means.
    pub class_rank: usize,
    pub shift: DomainShift,
    /// Range of the per-dimension target scaling.
    pub scale_range: (f64, f64),
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            num_classes: 10,
            feature_dim: 32,
            samples_per_class_per_domain: 200,
            class_separation: 4.0,
            class_rank: 3,
            shift: DomainShift::Affine,
            scale_range: (0.5, 2.0),
            noise_sigma: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, why: &str| Err(Error::Config(format!("synthetic.{name}: {why}")));
        if self.num_classes < 2 {
            return field("num_classes", "must be at least 2");
        }
        if self.feature_dim < 2 {
            return field("feature_dim", "must be at least 2");
        }
        if self.class_rank == 0 || self.class_rank > self.feature_dim {
            return field("class_rank", "must be in 1..=feature_dim");
        }
        if self.class_separation.is_nan() || self.class_separation <= 0.0 {
            return field("class_separation", "must be positive");
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return field("noise_sigma", "must be non-negative");
        }
        let (lo, hi) = self.scale_range;
        if !(lo > 0.0 && hi >= lo) {
            return field("scale_range", "must satisfy 0 < lo <= hi");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticBenchmark {
    pub source: FeatureDataset,
    pub target: FeatureDataset,
    /// Class means in the source domain, one row per class.
    pub class_means: Matrix,
    /// Target map `x ↦ x·Aᵀ + b`, stored as `A` (`d × d`) and `b` (`1 × d`).
    pub shift_matrix: Matrix,
    pub shift_offset: Matrix,
}

/// Columns of the result are orthonormal (Gram-Schmidt on Gaussian draws).
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    assert!(cols <= rows);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let mut m = Matrix::zeros(rows, cols);
    for (j, b) in basis.iter().enumerate() {
        for (i, &x) in b.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    m
}

fn class_coordinates(cfg: &SyntheticConfig, rng: &mut Rng) -> Vec<Vec<f64>> {
    let r = cfg.class_rank;
    let sep = cfg.class_separation;
    let mut side = 2.0 * sep * (cfg.num_classes as f64).powf(1.0 / r as f64);
    loop {
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(cfg.num_classes);
        let mut tries = 0;
        while pts.len() < cfg.num_classes && tries < 10_000 {
            tries += 1;
            let p: Vec<f64> = (0..r).map(|_| rng.uniform_range(-side / 2.0, side / 2.0)).collect();
            let far = pts.iter().all(|q| {
                p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() >= sep * sep
            });
            if far {
                pts.push(p);
                tries = 0;
            }
        }
        if pts.len() == cfg.num_classes {
            return pts;
        }
        side *= 1.1;
    }
}

pub fn gen_synthetic_benchmark(cfg: &SyntheticConfig) -> Result<SyntheticBenchmark> {
    cfg.validate()?;
    let d = cfg.feature_dim;
    let c = cfg.num_classes;
    let mut geo = Rng::new(derive_seed(cfg.seed, "synthetic-geometry", 0));

    let coords = class_coordinates(cfg, &mut geo);
    let basis = random_orthonormal(d, cfg.class_rank, &mut geo);
    let means = Matrix::from_rows(&coords).matmul_t(&basis)?;

    let (shift_matrix, shift_offset) = match cfg.shift {
        DomainShift::None => (Matrix::identity(d), Matrix::zeros(1, d)),
        DomainShift::Affine => {
            let mut a = random_orthonormal(d, d, &mut geo);
            for i in 0..d {
                let s = geo.uniform_range(cfg.scale_range.0, cfg.scale_range.1);
                a.row_mut(i).iter_mut().for_each(|v| *v *= s);
            }
            let mut b: Vec<f64> = (0..d).map(|_| geo.normal()).collect();
            let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            b.iter_mut().for_each(|v| *v *= cfg.class_separation / norm);
            (a, Matrix::from_rows(&[b]))
        }
    };
    let mut target_means = means.matmul_t(&shift_matrix)?;
    target_means.add_row(&shift_offset)?;

    let n = cfg.samples_per_class_per_domain;
    let sample = |centers: &Matrix, domain: Domain, purpose: &str| -> Result<FeatureDataset> {
        let mut rng = Rng::new(derive_seed(cfg.seed, purpose, 0));
        let mut feats = Matrix::zeros(c * n, d);
        let mut labels = Vec::with_capacity(c * n);
        for k in 0..c {
            for i in 0..n {
                let row = feats.row_mut(k * n + i);
                for (v, m) in row.iter_mut().zip(centers.row(k)) {
                    *v = m + cfg.noise_sigma * rng.normal();
                }
                labels.push(k);
            }
        }
        FeatureDataset::single_domain(feats, labels, domain)
    };
    let source = sample(&means, Domain::Source, "synthetic-source")?;
    let target = sample(&target_means, Domain::Target, "synthetic-target")?;

    Ok(SyntheticBenchmark {
        source,
        target,
        class_means: means,
        shift_matrix,
        shift_offset,
    })
}
