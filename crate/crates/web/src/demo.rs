use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use ccvae::ccvae::{generate_for_classes, WarmupSchedule};
use ccvae::classify::knn_predict;
use ccvae::data::{gen_synthetic_benchmark, make_task, random_splits, Domain, SyntheticConfig};
use ccvae::eval::{run_method, train_ccvae, Method, PipelineConfig};
use ccvae::nn::{derive_seed, Matrix, Rng};
use ccvae::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub synthetic: SyntheticConfig,
    pub num_unseen: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Cap on plotted points per group.
    pub max_points: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            synthetic: SyntheticConfig {
                samples_per_class_per_domain: 60,
                ..SyntheticConfig::default()
            },
            num_unseen: 5,
            epochs: 30,
            seed: 0,
            max_points: 400,
        }
    }
}

impl DemoConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(text).map_err(|e| format!("invalid demo config: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Points {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub label: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Preview {
    pub source: Points,
    pub target: Points,
    /// 1NN accuracy of source records used to label the target domain.
    pub source_to_target_1nn: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodScore {
    pub method: String,
    pub acc_seen: f64,
    pub acc_unseen: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitRun {
    pub unseen: Vec<usize>,
    pub loss: Vec<f64>,
    pub kl: Vec<f64>,
    pub scores: Vec<MethodScore>,
    pub target: Points,
    pub generated: Points,
}

/// Two leading principal directions of `x`, plus its column mean.
pub fn principal_axes(x: &Matrix) -> (Vec<f64>, [Vec<f64>; 2]) {
    let (n, d) = x.shape();
    let mut mean = vec![0.0; d];
    for r in 0..n {
        for (m, v) in mean.iter_mut().zip(x.row(r)) {
            *m += v / n as f64;
        }
    }
    let centered = DMatrix::from_fn(n, d, |r, c| x.get(r, c) - mean[c]);
    let cov = centered.transpose() * &centered;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let axis = |k: usize| -> Vec<f64> {
        match order.get(k) {
            Some(&i) => eig.eigenvectors.column(i).iter().copied().collect(),
            None => vec![0.0; d],
        }
    };
    (mean, [axis(0), axis(1)])
}

fn project(x: &Matrix, labels: &[usize], mean: &[f64], axes: &[Vec<f64>; 2], max_points: usize) -> Points {
    let step = x.rows().div_ceil(max_points.max(1)).max(1);
    let mut p = Points {
        x: Vec::new(),
        y: Vec::new(),
        label: Vec::new(),
    };
    for r in (0..x.rows()).step_by(step) {
        let dot = |a: &[f64]| x.row(r).iter().zip(mean).zip(a).map(|((v, m), w)| (v - m) * w).sum::<f64>();
        p.x.push(dot(&axes[0]));
        p.y.push(dot(&axes[1]));
        p.label.push(labels[r]);
    }
    p
}

pub fn preview(cfg: &DemoConfig) -> Result<Preview> {
    let b = gen_synthetic_benchmark(&cfg.synthetic)?;
    let (mean, axes) = principal_axes(b.target.features());
    let pred = knn_predict(b.source.features(), b.source.labels(), b.target.features())?;
    let hits = pred.iter().zip(b.target.labels()).filter(|(p, y)| p == y).count();
    Ok(Preview {
        source: project(b.source.features(), b.source.labels(), &mean, &axes, cfg.max_points),
        target: project(b.target.features(), b.target.labels(), &mean, &axes, cfg.max_points),
        source_to_target_1nn: hits as f64 / b.target.len() as f64,
    })
}

pub fn warmup_curve(lambda_max: f64, warmup_fraction: f64, epochs: usize, steps_per_epoch: usize) -> Vec<f64> {
    let total = epochs * steps_per_epoch;
    let schedule = WarmupSchedule::for_training(lambda_max, warmup_fraction, total);
    (0..total).map(|s| schedule.lambda(s)).collect()
}

/// One split: trains the CCVAE, scores Source-Only and CCVAE, and projects
/// the real and generated unseen-class target records.
pub fn run_split(cfg: &DemoConfig) -> Result<SplitRun> {
    let b = gen_synthetic_benchmark(&cfg.synthetic)?;
    let split = random_splits(cfg.synthetic.num_classes, cfg.num_unseen, 1, cfg.seed)?.remove(0);
    let task = make_task(&b.source, &b.target, &split)?;
    let mut pipeline = PipelineConfig::default();
    pipeline.train.epochs = cfg.epochs;
    pipeline.classifier.epochs = 300;

    let (model, history) = train_ccvae(&task, &pipeline, split.seed)?;
    let unseen: Vec<usize> = split.unseen.iter().copied().collect();
    let mut rng = Rng::new(derive_seed(split.seed, "demo-generate", 0));
    let (gen_x, gen_y) = generate_for_classes(&model, &task.source_train, &unseen, 60, Domain::Source, Domain::Target, &mut rng, false)?;

    let scores = [Method::SourceOnly, Method::Ccvae]
        .into_iter()
        .map(|m| {
            let r = run_method(m, &task, &pipeline, 0, split.seed)?;
            Ok(MethodScore {
                method: m.label().to_string(),
                acc_seen: r.acc_seen,
                acc_unseen: r.acc_unseen,
                h: r.h,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (mean, axes) = principal_axes(b.target.features());
    let unseen_rows: Vec<usize> = (0..task.target_test.len())
        .filter(|&i| split.unseen.contains(&task.target_test.labels()[i]))
        .collect();
    let real = task.target_test.subset(&unseen_rows);
    Ok(SplitRun {
        unseen,
        loss: history.epochs.iter().map(|e| e.total).collect(),
        kl: history.epochs.iter().map(|e| e.kl).collect(),
        scores,
        target: project(real.features(), real.labels(), &mean, &axes, cfg.max_points),
        generated: project(&gen_x, &gen_y, &mean, &axes, cfg.max_points),
    })
}
