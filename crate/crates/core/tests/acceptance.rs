//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use ccvae::ccvae::{checkpoint_bytes, checkpoint_from_bytes, ccvae_loss, kl_divergence, train, CcvaeDims, CcvaeModel, TrainConfig};
use ccvae::classify::knn_predict;
use ccvae::commands::{cmd_benchmark, tiny_ccvae_case, RunConfig};
use ccvae::data::io::{fvec_from_bytes, fvec_to_bytes};
use ccvae::data::{gen_synthetic_benchmark, Domain, DomainShift, FeatureDataset, PairBatch};
use ccvae::eval::{harmonic_summary, mean_sem, per_class_accuracy, run_benchmark, BenchmarkConfig, Method};
use ccvae::nn::{grad_check, AdamConfig, GradCheckOptions, Matrix, Parameterized, Rng};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let (mut model, batch) = tiny_ccvae_case(3);
    let masked = batch.valid_t.iter().filter(|v| !**v).count();
    let report = grad_check(
        &mut model,
        |m: &mut CcvaeModel| Ok(ccvae_loss(m, &batch, 0.2, &mut Rng::new(5))?.total),
        &GradCheckOptions::default(),
    );
    let elapsed = start.elapsed();
    match report {
        Ok(r) => outcome(
            r.max_rel_error < 1e-4 && r.checked == model.num_parameters() && masked == 1 && elapsed < Duration::from_secs(10),
            format!(
                "max rel error {:.2e} over all {} parameters (batch 4, {masked} masked), {:.2?}",
                r.max_rel_error, r.checked, elapsed
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

/// `E_q[log q(z) − log N(z; 0, I)]` by sampling, written out from the
/// densities rather than the closed form.
fn kl_mc_oracle(mu: &[f64], logvar: &[f64], n: usize, rng: &mut Rng) -> f64 {
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let mut acc = 0.0;
    for _ in 0..n {
        let mut log_q = 0.0;
        let mut log_p = 0.0;
        for (m, lv) in mu.iter().zip(logvar) {
            let sd = (0.5 * lv).exp();
            let z = m + sd * rng.normal();
            log_q += -0.5 * (ln2pi + lv + ((z - m) / sd).powi(2));
            log_p += -0.5 * (ln2pi + z * z);
        }
        acc += log_q - log_p;
    }
    acc / n as f64
}

fn kl_oracle() -> Outcome {
    let start = Instant::now();
    let zero = kl_divergence(&Matrix::zeros(1, 4), &Matrix::zeros(1, 4)).unwrap();
    let mut rng = Rng::new(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mu = rng.uniform_matrix(1, 4, -2.0, 2.0);
        let lv = rng.uniform_matrix(1, 4, -1.5, 1.5);
        let exact = kl_divergence(&mu, &lv).unwrap();
        let mc = kl_mc_oracle(mu.row(0), lv.row(0), 1_000_000, &mut rng);
        worst = worst.max((exact - mc).abs() / mc.abs());
    }
    let elapsed = start.elapsed();
    outcome(
        zero == 0.0 && worst < 0.01 && elapsed < Duration::from_secs(30),
        format!("KL(0,0) = {zero}; worst relative gap over 20 cases {worst:.2e} (10^6 samples each), {elapsed:.2?}"),
    )
}

fn mean_per_class(pred: &[usize], labels: &[usize]) -> f64 {
    let acc = per_class_accuracy(pred, labels).unwrap();
    acc.values().sum::<f64>() / acc.len() as f64
}

/// 1NN source→target accuracy and within-target 1NN accuracy (alternate
/// records of each class as train/test).
fn certify(source: &FeatureDataset, target: &FeatureDataset) -> (f64, f64) {
    let cross = knn_predict(source.features(), source.labels(), target.features()).unwrap();
    let cross_acc = mean_per_class(&cross, target.labels());
    let (mut tr, mut te) = (Vec::new(), Vec::new());
    for c in target.classes() {
        for (k, i) in target.indices_of_class(c).into_iter().enumerate() {
            if k % 2 == 0 {
                tr.push(i)
            } else {
                te.push(i)
            }
        }
    }
    let (a, b) = (target.subset(&tr), target.subset(&te));
    let within = knn_predict(a.features(), a.labels(), b.features()).unwrap();
    (cross_acc, mean_per_class(&within, b.labels()))
}

fn qualitative_and_determinism(dir: &std::path::Path) -> (Outcome, Outcome) {
    let cfg = RunConfig {
        out: dir.join("benchmark"),
        ..RunConfig::default()
    }
    .resolve()
    .unwrap();
    let bench = gen_synthetic_benchmark(&cfg.data.synthetic).unwrap();
    let (cross, within) = certify(&bench.source, &bench.target);
    let certified = cross < 0.40 && within > 0.95;

    let start = Instant::now();
    let first = cmd_benchmark(&cfg);
    let elapsed = start.elapsed();
    let third = match &first {
        Ok(result) => {
            let nn = result.aggregate.row(Method::BaselineNn).unwrap();
            let cc = result.aggregate.row(Method::Ccvae).unwrap();
            let gap = cc.h.mean - nn.h.mean;
            outcome(
                certified
                    && nn.acc_seen.mean >= 0.90
                    && gap >= 0.15
                    && cc.acc_unseen.mean >= 0.60
                    && elapsed < Duration::from_secs(300),
                format!(
                    "shift certified (src→tgt 1NN {cross:.3}, within-target 1NN {within:.3}); Baseline(NN) seen {:.3}, H {:.3}; CCVAE seen {:.3}, unseen {:.3}, H {:.3}; H gap {gap:.3}; {} splits in {elapsed:.1?}",
                    nn.acc_seen.mean, nn.h.mean, cc.acc_seen.mean, cc.acc_unseen.mean, cc.h.mean, nn.num_splits
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    };

    // Same config, same output directory: the second run overwrites the first.
    let sixth = match first {
        Ok(_) => {
            let a = std::fs::read(cfg.out.join("summary.csv")).unwrap();
            match cmd_benchmark(&cfg) {
                Ok(_) => {
                    let b = std::fs::read(cfg.out.join("summary.csv")).unwrap();
                    outcome(
                        a == b,
                        format!(
                            "two invocations with master seed {}: summary.csv {} and {} bytes, identical {}",
                            cfg.seed,
                            a.len(),
                            b.len(),
                            a == b
                        ),
                    )
                }
                Err(e) => outcome(false, e.to_string()),
            }
        }
        Err(e) => outcome(false, e.to_string()),
    };
    (third, sixth)
}

fn no_shift_control() -> Outcome {
    let mut cfg = RunConfig::default().resolve().unwrap();
    cfg.data.synthetic.shift = DomainShift::None;
    let bench = gen_synthetic_benchmark(&cfg.data.synthetic).unwrap();
    let bcfg = BenchmarkConfig {
        methods: vec![Method::SourceOnly],
        ..BenchmarkConfig::default()
    };
    match run_benchmark(&bench.source, &bench.target, &bcfg, cfg.seed, 1) {
        Ok(r) => {
            let row = r.aggregate.row(Method::SourceOnly).unwrap();
            let diff = (row.acc_seen.mean - row.acc_unseen.mean).abs();
            outcome(
                diff <= 0.05,
                format!(
                    "Source-Only seen {:.3}, unseen {:.3}, |diff| {diff:.3} over {} splits",
                    row.acc_seen.mean, row.acc_unseen.mean, row.num_splits
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn metric_units() -> Outcome {
    let split = ccvae::data::SplitSpec::new([0], [1], 0.5, 0).unwrap();
    let h = |a: f64, b: f64| {
        let per = [(0usize, a), (1usize, b)].into_iter().collect();
        harmonic_summary(&per, &split).h
    };
    let hxx = h(0.8, 0.8);
    let hx0 = h(0.8, 0.0);
    let h73 = h(0.7, 0.3);
    let sem = mean_sem(&[0.2, 0.4]).unwrap();
    let ok = (hxx - 0.8).abs() < 1e-12
        && hx0 == 0.0
        && h(0.0, 0.0) == 0.0
        && (h73 - 0.42).abs() < 1e-12
        && (sem.mean - 0.3).abs() < 1e-12
        && sem.sem.is_some_and(|s| (s - 0.1).abs() < 1e-12);
    outcome(
        ok,
        format!(
            "H(0.8,0.8)={hxx}, H(0.8,0)={hx0}, H(0.7,0.3)={h73}, SEM{{0.2,0.4}}={:?}",
            sem.sem
        ),
    )
}

fn grads_bits(m: &CcvaeModel) -> Vec<u64> {
    m.parameters().iter().flat_map(|p| p.grad.data().iter().map(|v| v.to_bits())).collect()
}

fn mask_exclusion() -> Outcome {
    let mut rng = Rng::new(77);
    let mut worst_terms = 0usize;
    let mut cases = 0usize;
    let mut unseen_ok = true;
    for case in 0..20 {
        let dims = CcvaeDims {
            feature_dim: 2 + rng.below(6),
            hidden: vec![2 + rng.below(6)],
            latent_dim: 1 + rng.below(4),
        };
        let model = CcvaeModel::new(dims.clone(), &mut rng).unwrap();
        let n = 1 + rng.below(8);
        let xs = rng.normal_matrix(n, dims.feature_dim);
        let xt = rng.normal_matrix(n, dims.feature_dim);
        let mut valid: Vec<bool> = (0..n).map(|_| rng.uniform() < 0.6).collect();
        valid[0] = true;
        let batch = PairBatch::new(xs, xt, vec![0; n], valid).unwrap();
        let lambda = rng.uniform_range(0.0, 0.2);

        let mut base = model.clone();
        let lb = ccvae_loss(&mut base, &batch, lambda, &mut Rng::new(case)).unwrap();
        let mut padded = batch.clone();
        for _ in 0..1 + rng.below(3) {
            padded.push_padding();
        }
        let mut with_pad = model.clone();
        let lp = ccvae_loss(&mut with_pad, &padded, lambda, &mut Rng::new(case)).unwrap();
        let bits = |b: &ccvae::ccvae::LossBreakdown| {
            [b.recon_s, b.recon_t, b.cross_st, b.cross_ts, b.kl, b.lambda, b.total].map(f64::to_bits)
        };
        let differing = bits(&lb).iter().zip(bits(&lp)).filter(|(a, b)| **a != *b).count()
            + usize::from(grads_bits(&base) != grads_bits(&with_pad));
        worst_terms = worst_terms.max(differing);
        cases += 1;

        // A source row with a dummy target leaves the target-side terms alone.
        let mut unseen = batch.clone();
        unseen.push(&rng.normal_matrix(1, dims.feature_dim).into_vec(), None, 1).unwrap();
        let mut m3 = model.clone();
        let lu = ccvae_loss(&mut m3, &unseen, lambda, &mut Rng::new(case)).unwrap();
        unseen_ok &= lu.recon_t.to_bits() == lb.recon_t.to_bits()
            && lu.cross_st.to_bits() == lb.cross_st.to_bits()
            && lu.cross_ts.to_bits() == lb.cross_ts.to_bits();
    }
    outcome(
        worst_terms == 0 && unseen_ok,
        format!(
            "{cases} random batches with appended padding rows: breakdown and gradients bitwise equal; unseen-class row leaves target-side terms unchanged: {unseen_ok}"
        ),
    )
}

fn warmup_contract() -> Outcome {
    let mut rng = Rng::new(5);
    let feats = rng.normal_matrix(60, 4);
    let source = FeatureDataset::single_domain(feats, (0..60).map(|i| i % 3).collect(), Domain::Source).unwrap();
    let target = FeatureDataset::single_domain(rng.normal_matrix(20, 4), (0..20).map(|i| i % 2).collect(), Domain::Target).unwrap();
    let mut model = CcvaeModel::new(CcvaeDims::default_for(4), &mut rng).unwrap();
    let cfg = TrainConfig {
        epochs: 7,
        batch_size: 16,
        adam: AdamConfig::default(),
        ..TrainConfig::default()
    };
    let h = train(&mut model, &source, &target, &cfg).unwrap();
    let l = &h.lambdas;
    let monotone = l.windows(2).all(|w| w[1] >= w[0]);
    let last = *l.last().unwrap();
    outcome(
        l[0] == 0.0 && monotone && last == 0.2,
        format!("{} recorded steps: first {}, last {last}, nondecreasing {monotone}", l.len(), l[0]),
    )
}

fn random_dataset(rng: &mut Rng) -> FeatureDataset {
    let n = rng.below(40);
    let d = 1 + rng.below(12);
    let labels = (0..n).map(|_| rng.below(500)).collect();
    let domains = (0..n).map(|_| if rng.uniform() < 0.5 { Domain::Source } else { Domain::Target }).collect();
    let mut x = rng.normal_matrix(n, d);
    x.scale(10f64.powi(rng.below(7) as i32 - 3));
    FeatureDataset::new(x, labels, domains).unwrap()
}

fn round_trips() -> Outcome {
    let mut rng = Rng::new(909);
    let mut fvec_ok = 0;
    let mut ckpt_ok = 0;
    for i in 0..20 {
        let ds = random_dataset(&mut rng);
        let a = fvec_to_bytes(&ds).unwrap();
        let b = fvec_to_bytes(&fvec_from_bytes(&a).unwrap()).unwrap();
        fvec_ok += usize::from(a == b);

        let dims = CcvaeDims {
            feature_dim: 1 + rng.below(10),
            hidden: (0..rng.below(3)).map(|_| 1 + rng.below(9)).collect(),
            latent_dim: 1 + rng.below(5),
        };
        let model = CcvaeModel::new(dims, &mut rng).unwrap();
        let echo = serde_json::json!({"instance": i, "seed": rng.below(1000), "note": "round trip"});
        let a = checkpoint_bytes(&model, &echo).unwrap();
        let (back, back_echo) = checkpoint_from_bytes(&a).unwrap();
        let b = checkpoint_bytes(&back, &back_echo).unwrap();
        ckpt_ok += usize::from(a == b);
    }
    outcome(
        fvec_ok == 20 && ckpt_ok == 20,
        format!("byte-identical save→load→save: FVEC {fvec_ok}/20, checkpoint {ckpt_ok}/20"),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "gradient correctness", gradient_correctness()));
    results.push((2, "KL oracle", kl_oracle()));
    let (third, sixth) = qualitative_and_determinism(dir.path());
    results.push((3, "qualitative reproduction", third));
    results.push((4, "no-shift control", no_shift_control()));
    results.push((5, "metric units", metric_units()));
    results.push((6, "determinism", sixth));
    results.push((7, "mask exclusion", mask_exclusion()));
    results.push((8, "warm-up contract", warmup_contract()));
    results.push((9, "file-format round-trips", round_trips()));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n} [{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
