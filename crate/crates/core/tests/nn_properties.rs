use ccvae::nn::{grad_check, softmax_cross_entropy, Adam, AdamConfig, GradCheckOptions, Matrix, Mlp, Parameterized, Rng};
use proptest::prelude::*;

fn naive_product(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut s = 0.0;
            for k in 0..a.cols() {
                s += a.get(i, k) * b.get(k, j);
            }
            out.set(i, j, s);
        }
    }
    out
}

fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    a.shape() == b.shape() && a.data().iter().zip(b.data()).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn mlp_backward_matches_finite_differences(
        seed in any::<u64>(),
        dims in prop::collection::vec(1usize..6, 2..5),
        batch in 1usize..5,
    ) {
        let mut rng = Rng::new(seed);
        let mut net = Mlp::new("net", &dims, &mut rng).unwrap();
        // Nudge biases off zero so ReLU kinks are unlikely to sit within h.
        for p in net.parameters_mut() {
            if p.name.ends_with("bias") {
                p.value = rng.uniform_matrix(1, p.value.cols(), -0.5, 0.5);
            }
        }
        let x = rng.normal_matrix(batch, dims[0]);
        let dir = rng.normal_matrix(batch, *dims.last().unwrap());
        let report = grad_check(
            &mut net,
            |m: &mut Mlp| {
                let (out, cache) = m.forward(&x)?;
                m.backward(&cache, &dir)?;
                Ok(out.data().iter().zip(dir.data()).map(|(a, b)| a * b).sum())
            },
            &GradCheckOptions::default(),
        )
        .unwrap();
        prop_assert!(report.max_rel_error < 1e-6, "{:?}", report);
    }

    #[test]
    fn input_gradient_matches_finite_differences(seed in any::<u64>(), batch in 1usize..4) {
        let mut rng = Rng::new(seed);
        let net = Mlp::new("net", &[3, 4, 2], &mut rng).unwrap();
        let x = rng.normal_matrix(batch, 3);
        let dir = rng.normal_matrix(batch, 2);
        let f = |x: &Matrix| -> f64 {
            net.predict(x).unwrap().data().iter().zip(dir.data()).map(|(a, b)| a * b).sum()
        };
        let (_, cache) = net.forward(&x).unwrap();
        let mut scratch = net.clone();
        let dx = scratch.backward(&cache, &dir).unwrap();
        let h = 1e-5;
        for i in 0..x.data().len() {
            let mut plus = x.clone();
            plus.data_mut()[i] += h;
            let mut minus = x.clone();
            minus.data_mut()[i] -= h;
            let numeric = (f(&plus) - f(&minus)) / (2.0 * h);
            let analytic = dx.data()[i];
            prop_assert!((numeric - analytic).abs() / analytic.abs().max(numeric.abs()).max(1e-4) < 1e-6);
        }
    }

    #[test]
    fn softmax_gradient_rows_sum_to_zero(seed in any::<u64>(), n in 1usize..8, c in 2usize..6) {
        let mut rng = Rng::new(seed);
        let logits = rng.normal_matrix(n, c);
        let labels: Vec<usize> = (0..n).map(|_| rng.below(c)).collect();
        let (loss, g) = softmax_cross_entropy(&logits, &labels).unwrap();
        prop_assert!(loss >= 0.0);
        for i in 0..n {
            prop_assert!(g.row(i).iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn transposed_products_agree_with_naive(seed in any::<u64>(), n in 1usize..6, k in 1usize..6, m in 1usize..6) {
        let mut rng = Rng::new(seed);
        let a = rng.normal_matrix(n, k);
        let b = rng.normal_matrix(k, m);
        let bt = b.transpose();
        let at = a.transpose();
        let c = rng.normal_matrix(n, m);
        prop_assert!(close(&a.matmul(&b).unwrap(), &naive_product(&a, &b), 1e-12));
        prop_assert!(close(&a.matmul_t(&bt).unwrap(), &naive_product(&a, &b), 1e-12));
        prop_assert!(close(&a.t_matmul(&c).unwrap(), &naive_product(&at, &c), 1e-12));
    }

    #[test]
    fn adam_with_zero_gradients_keeps_values(seed in any::<u64>(), steps in 1usize..20) {
        let mut rng = Rng::new(seed);
        let mut net = Mlp::new("net", &[3, 4, 2], &mut rng).unwrap();
        let before = net.clone();
        let mut adam = Adam::new(AdamConfig::with_lr(0.1)).unwrap();
        for _ in 0..steps {
            adam.step(net.parameters_mut()).unwrap();
        }
        prop_assert_eq!(adam.step_count, steps as u64);
        for (p, q) in net.parameters().iter().zip(before.parameters()) {
            prop_assert_eq!(&p.value, &q.value);
        }
    }
}

#[test]
fn seeded_training_trajectories_are_bit_identical() {
    let run = || {
        let mut rng = Rng::new(42);
        let mut net = Mlp::new("net", &[4, 8, 3], &mut rng).unwrap();
        let x = rng.normal_matrix(16, 4);
        let y: Vec<usize> = (0..16).map(|_| rng.below(3)).collect();
        let mut adam = Adam::new(AdamConfig::default()).unwrap();
        let mut trajectory = Vec::new();
        for _ in 0..25 {
            let (out, cache) = net.forward(&x).unwrap();
            let (loss, g) = softmax_cross_entropy(&out, &y).unwrap();
            net.backward(&cache, &g).unwrap();
            adam.step(net.parameters_mut()).unwrap();
            trajectory.push(loss.to_bits());
        }
        let values: Vec<u64> = net
            .parameters()
            .iter()
            .flat_map(|p| p.value.data().iter().map(|v| v.to_bits()))
            .collect();
        (trajectory, values)
    };
    assert_eq!(run(), run());
}

#[test]
fn adam_step_zeroes_gradients() {
    let mut rng = Rng::new(1);
    let mut net = Mlp::new("net", &[2, 2], &mut rng).unwrap();
    let (_, cache) = net.forward(&rng.normal_matrix(3, 2)).unwrap();
    net.backward(&cache, &Matrix::filled(3, 2, 1.0)).unwrap();
    assert!(net.parameters().iter().any(|p| p.grad.data().iter().any(|&g| g != 0.0)));
    Adam::new(AdamConfig::default()).unwrap().step(net.parameters_mut()).unwrap();
    assert!(net.parameters().iter().all(|p| p.grad.data().iter().all(|&g| g == 0.0)));
}
