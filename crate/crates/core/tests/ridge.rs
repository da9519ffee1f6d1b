use plantar::linalg::norm2;
use plantar::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_design(rng: &mut ChaCha8Rng, pixels: usize, steps: usize) -> (DesignMatrix<f64>, Vec<f64>) {
    let data: Vec<f64> = (0..pixels * steps).map(|_| rng.sample(StandardNormal)).collect();
    let theta: Vec<f64> = (0..steps).map(|_| rng.sample(StandardNormal)).collect();
    (DesignMatrix::new(pixels, steps, data).unwrap(), theta)
}

/// Nesterov-accelerated gradient descent on `‖θ − wP‖² + λ‖w‖²`, with the
/// Gram matrix built by plain loops.
fn gd_minimizer(design: &DesignMatrix<f64>, theta: &[f64], lambda: f64) -> Vec<f64> {
    let (n, t) = (design.rows(), design.cols());
    let mut g = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = (0..t).map(|k| design.row(i)[k] * design.row(j)[k]).sum();
        }
        b[i] = (0..t).map(|k| design.row(i)[k] * theta[k]).sum();
    }
    // Largest eigenvalue by power iteration bounds the step size.
    let mut v = vec![1.0; n];
    let mut top = 0.0;
    for _ in 0..200 {
        let gv: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g[i * n + j] * v[j]).sum()).collect();
        top = gv.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = gv.iter().map(|x| x / top).collect();
    }
    let (l, mu) = (1.05 * top + lambda, lambda);
    let q = ((l / mu).sqrt() - 1.0) / ((l / mu).sqrt() + 1.0);
    let mut w = vec![0.0; n];
    let mut y = w.clone();
    for _ in 0..200_000 {
        let grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g[i * n + j] * y[j]).sum::<f64>() + lambda * y[i] - b[i]).collect();
        let next: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - gi / l).collect();
        let step: f64 = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        y = next.iter().zip(&w).map(|(a, b)| a + q * (a - b)).collect();
        w = next;
        if step < 1e-14 {
            break;
        }
    }
    w
}

#[test]
fn closed_form_matches_gradient_descent() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for &lambda in &[0.1, 10.0, 1000.0] {
        for _ in 0..3 {
            let pixels = rng.random_range(10..=40);
            let steps = rng.random_range(100..=300);
            let (design, theta) = random_design(&mut rng, pixels, steps);
            let w = ridge_fit(&design, &theta, lambda).unwrap();
            let oracle = gd_minimizer(&design, &theta, lambda);
            let diff = w.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-6, "λ={lambda}: {diff}");
        }
    }
}

#[test]
fn perturbations_never_lower_the_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (design, theta) = random_design(&mut rng, 25, 200);
    let w = ridge_fit(&design, &theta, 10.0).unwrap();
    let best = ridge_loss(&w, &design, &theta, 10.0).unwrap();
    for _ in 0..200 {
        let scale = 10f64.powi(rng.random_range(-4..0));
        let pert: Vec<f64> = w.iter().map(|&v| v + scale * rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(ridge_loss(&pert, &design, &theta, 10.0).unwrap() >= best);
    }
}

#[test]
fn gram_dimension_mismatch_is_rejected() {
    let design = DesignMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
    assert!(matches!(ridge_fit(&design, &[1.0, 2.0], 1.0), Err(Error::DimensionMismatch(_))));
    assert!(ridge_fit(&design, &[1.0, 2.0, 3.0], 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_norm_shrinks_with_lambda(seed in any::<u64>(), l1 in 0.01f64..100.0, factor in 1.5f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (design, theta) = random_design(&mut rng, 8, 40);
        let w1 = ridge_fit(&design, &theta, l1).unwrap();
        let w2 = ridge_fit(&design, &theta, l1 * factor).unwrap();
        prop_assert!(norm2(&w2) <= norm2(&w1) * (1.0 + 1e-12));
    }

    #[test]
    fn scaling_targets_scales_weights(seed in any::<u64>(), c in -50.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (design, theta) = random_design(&mut rng, 6, 30);
        let w = ridge_fit(&design, &theta, 1.0).unwrap();
        let scaled: Vec<f64> = theta.iter().map(|v| v * c).collect();
        let ws = ridge_fit(&design, &scaled, 1.0).unwrap();
        for (a, b) in w.iter().zip(&ws) {
            prop_assert!((a * c - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}

/// Trial whose four angles are exact linear functions of ten active pixels.
fn linear_world(seed: u64) -> TrialDataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels: Vec<usize> = (0..10).map(|k| 100 + 211 * k).collect();
    let coef: Vec<[f64; 4]> = (0..10).map(|_| std::array::from_fn(|_| rng.random_range(-3.0..3.0))).collect();
    let mut frames = Vec::new();
    let mut angles = Vec::new();
    for k in 0..1500i64 {
        let mut values = vec![0.0; GRID_CELLS];
        let mut a = [20.0, 40.0, 30.0, 10.0];
        for (j, &px) in pixels.iter().enumerate() {
            let v = 5.0 + rng.random_range(0.0..1.0);
            values[px] = v;
            for c in 0..4 {
                a[c] += coef[j][c] * v;
            }
        }
        frames.push(PressureFrame::new(k * 20, values).unwrap());
        angles.push(AngleSample::from_array(k * 20, a));
    }
    TrialDataset::new("lin", "p", Condition::Nothing, 20, frames, angles).unwrap()
}

#[test]
fn linear_world_is_recovered() {
    let trial = linear_world(42);
    let fit = train_eval_trial(&trial, &PipelineConfig::default()).unwrap();
    assert_eq!(fit.validation, 1275..1500);
    for r in fit.reports() {
        assert!(r.r2 > 0.999, "{}: {}", r.channel, r.r2);
        assert_eq!(r.n_validation, 225);
    }
}

#[test]
fn predict_reproduces_training_readout() {
    let trial = linear_world(5);
    let fit = train_eval_trial(&trial, &PipelineConfig::default()).unwrap();
    let (model, report) = fit.channel(AngleChannel::Hip).as_ref().unwrap();
    let est = predict(model, &trial.frames[fit.validation.clone()]).unwrap();
    let measured: Vec<f64> = trial.angles[fit.validation.clone()].iter().map(|a| a.hip_deg).collect();
    assert!((rmse(&measured, &est).unwrap() - report.rmse_deg).abs() < 1e-12);
    assert!((r_squared(&measured, &est).unwrap() - report.r2).abs() < 1e-12);
    assert_eq!(predict(model, &[]).unwrap(), Vec::<f64>::new());
}

#[test]
fn single_precision_pipeline_runs() {
    let t = linear_world(9);
    let frames: Vec<PressureFrame32> =
        t.frames.iter().map(|f| PressureFrame::new(f.t_ms, f.values.iter().map(|&v| v as f32).collect()).unwrap()).collect();
    let angles: Vec<AngleSample32> =
        t.angles.iter().map(|a| AngleSample::from_array(a.t_ms, a.to_array().map(|v| v as f32))).collect();
    let trial = TrialDataset::new("lin", "p", Condition::Nothing, 20, frames, angles).unwrap();
    let fit = train_eval_trial(&trial, &PipelineConfig32::default()).unwrap();
    for r in fit.reports() {
        assert!(r.r2 > 0.99, "{}: {}", r.channel, r.r2);
    }
}

#[test]
fn metrics_reject_bad_input() {
    assert_eq!(rmse(&[1.0, 2.0], &[1.0]).unwrap_err(), Error::LengthMismatch { left: 2, right: 1 });
    assert!(matches!(r_squared(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0]), Err(Error::ZeroVariance { .. })));
    assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
    assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
}
