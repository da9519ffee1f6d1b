//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with the
//! measured value next to its tolerance; the process fails if any check does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use plantar::io::{load_trial, save_model, load_model, save_trial, TrialFilePair};
use plantar::preprocess::grid_search_threshold;
use plantar::resample::resample_linear;
use plantar::synth::{plan_batch, Design, PressureModel, SquatConfig};
use plantar::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

type Check = Result<String, String>;

fn ok_if(pass: bool, msg: String) -> Check {
    if pass { Ok(msg) } else { Err(msg) }
}

// 1 -------------------------------------------------------------------------

/// Nesterov-accelerated gradient descent on `‖θ − wP‖² + λ‖w‖²`.
fn gd_minimizer(design: &DesignMatrix<f64>, theta: &[f64], lambda: f64) -> Vec<f64> {
    let (n, t) = (design.rows(), design.cols());
    let mut g = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = design.row(i).iter().zip(design.row(j)).map(|(x, y)| x * y).sum();
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
        b[i] = design.row(i).iter().zip(theta).map(|(x, y)| x * y).sum::<f64>();
    }
    let matvec = |x: &[f64]| -> Vec<f64> { (0..n).map(|i| g[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum()).collect() };
    let mut v = vec![1.0; n];
    let mut top = 0.0;
    for _ in 0..300 {
        let gv = matvec(&v);
        top = gv.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = gv.iter().map(|x| x / top).collect();
    }
    let l = 1.05 * top + lambda;
    let q = ((l / lambda).sqrt() - 1.0) / ((l / lambda).sqrt() + 1.0);
    let mut w = vec![0.0; n];
    let mut y = w.clone();
    for _ in 0..500_000 {
        let gy = matvec(&y);
        let next: Vec<f64> = (0..n).map(|i| y[i] - (gy[i] + lambda * y[i] - b[i]) / l).collect();
        let step = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        y = next.iter().zip(&w).map(|(a, b)| a + q * (a - b)).collect();
        w = next;
        if step < 1e-15 {
            break;
        }
    }
    let _ = t;
    w
}

fn ridge_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let lambdas = [0.1, 10.0, 1000.0];
    let mut worst = 0.0f64;
    let mut solve_time = 0.0;
    let start = Instant::now();
    for k in 0..50 {
        let pixels = rng.random_range(10..=100);
        let steps = rng.random_range(100..=1000);
        let lambda = lambdas[k % 3];
        let data: Vec<f64> = (0..pixels * steps).map(|_| rng.sample(StandardNormal)).collect();
        let theta: Vec<f64> = (0..steps).map(|_| rng.sample(StandardNormal)).collect();
        let design = DesignMatrix::new(pixels, steps, data).map_err(|e| e.to_string())?;
        let t0 = Instant::now();
        let w = ridge_fit(&design, &theta, lambda).map_err(|e| e.to_string())?;
        solve_time += t0.elapsed().as_secs_f64();
        let oracle = gd_minimizer(&design, &theta, lambda);
        worst = w.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    let total = start.elapsed().as_secs_f64();
    ok_if(
        worst < 1e-6 && total < 5.0,
        format!("max |w - w_gd| = {worst:.2e} (< 1e-6) over 50 instances; {total:.2} s including the oracle (< 5 s), closed-form solves {solve_time:.3} s"),
    )
}

// 2 -------------------------------------------------------------------------

fn linear_world() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pixels: Vec<usize> = (0..10).map(|k| 300 + 150 * k).collect();
    let coef: Vec<[f64; 4]> = (0..10).map(|_| std::array::from_fn(|_| rng.random_range(-3.0..3.0))).collect();
    let mut frames = Vec::new();
    let mut angles = Vec::new();
    for k in 0..1500i64 {
        let mut values = vec![0.0; GRID_CELLS];
        let mut a = [10.0, 30.0, 35.0, 15.0];
        for (j, &px) in pixels.iter().enumerate() {
            let v = rng.random_range(0.0..10.0);
            values[px] = v;
            for c in 0..4 {
                a[c] += coef[j][c] * v;
            }
        }
        frames.push(PressureFrame { t_ms: k * 20, values });
        angles.push(AngleSample::from_array(k * 20, a));
    }
    let trial = TrialDataset::new("linear", "p", Condition::Nothing, 20, frames, angles).map_err(|e| e.to_string())?;
    let fit = train_eval_trial(&trial, &PipelineConfig::default()).map_err(|e| e.to_string())?;
    let r2: Vec<f64> = fit.reports().map(|r| r.r2).collect();
    let min = r2.iter().copied().fold(f64::INFINITY, f64::min);
    ok_if(
        r2.len() == 4 && min > 0.999,
        format!("validation R² ankle/knee/hip/upper = {:.6}/{:.6}/{:.6}/{:.6} (all > 0.999)", r2[0], r2[1], r2[2], r2[3]),
    )
}

// 3 -------------------------------------------------------------------------

fn ablation() -> Check {
    let start = Instant::now();
    let plans = plan_batch(&Design::default(), &Condition::ALL, 2024);
    let squat = SquatConfig::default();
    let model = PressureModel::default();
    let config = PipelineConfig::default();
    let results: Vec<plantar::Result<Vec<EvalReport<f64>>>> = plans
        .par_iter()
        .map(|p| {
            let trial = p.generate(&squat, &model)?;
            let fit = train_eval_trial(&trial, &config)?;
            fit.channels.into_iter().map(|c| c.map(|(_, r)| r)).collect()
        })
        .collect();
    let reports: Vec<EvalReport<f64>> = results.into_iter().collect::<plantar::Result<Vec<_>>>().map_err(|e| e.to_string())?.concat();
    let elapsed = start.elapsed().as_secs_f64();
    let group = |c: Condition| -> Vec<EvalReport<f64>> { reports.iter().filter(|r| r.condition == c).cloned().collect() };
    let (a, b, c) = (group(Condition::Nothing), group(Condition::Rubber), group(Condition::Plastic));
    let mut pass = plans.len() == 77 && reports.len() == 308 && elapsed < 60.0;
    let mut parts = Vec::new();
    for ch in AngleChannel::ALL {
        let ab = compare_conditions(&a, &b, Metric::R2, ch).map_err(|e| e.to_string())?;
        let ac = compare_conditions(&a, &c, Metric::R2, ch).map_err(|e| e.to_string())?;
        let strict = ch != AngleChannel::Upper;
        pass &= ab.mean_a >= 0.85;
        if strict {
            pass &= ab.significant && ac.significant && ab.mean_b < ab.mean_a && ac.mean_b < ac.mean_a;
        }
        parts.push(format!(
            "{ch}: A {:.3} B {:.3} C {:.3} p(A,B)={:.1e} p(A,C)={:.1e}",
            ab.mean_a, ab.mean_b, ac.mean_b, ab.welch.p_value, ac.welch.p_value
        ));
    }
    ok_if(
        pass,
        format!(
            "77 trials in {elapsed:.1} s (< 60 s); mean A R² >= 0.85, Welch p < 0.05 on ankle/knee/hip\n         {}",
            parts.join("\n         ")
        ),
    )
}

// 4 -------------------------------------------------------------------------

fn stats_fixtures() -> Check {
    let w = welch_t::<f64>(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).map_err(|e| e.to_string())?;
    let sw3 = shapiro_wilk::<f64>(&[1.0, 2.0, 3.0]).map_err(|e| e.to_string())?;
    // scipy.stats.shapiro on this sample: W = 0.78881469, p = 0.00670381.
    let sample: [f64; 11] = [148.0, 154.0, 158.0, 160.0, 161.0, 162.0, 166.0, 170.0, 182.0, 195.0, 236.0];
    let sw = shapiro_wilk(&sample).map_err(|e| e.to_string())?;
    let df = w.df.unwrap_or(f64::NAN);
    let (dw, dp) = ((sw.statistic - 0.7888146948631716).abs(), (sw.p_value - 0.006703814061898823).abs());
    ok_if(
        (w.statistic + 1.2247).abs() < 1e-4 && (df - 4.0).abs() < 1e-9 && (sw3.statistic - 1.0).abs() < 1e-9 && dw < 1e-3 && dp < 1e-3,
        format!(
            "Welch t = {:.6} df = {df:.9}; W(1,2,3) = {:.12}; reference sample |ΔW| = {dw:.1e}, |Δp| = {dp:.1e} (< 1e-3)",
            w.statistic, sw3.statistic
        ),
    )
}

// 5 -------------------------------------------------------------------------

fn resampling() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_affine = 0.0f64;
    let mut bracket_violations = 0usize;
    let cases = 10_000;
    for _ in 0..cases {
        let n = rng.random_range(2..80);
        let mut t = Vec::with_capacity(n);
        let mut now = rng.random_range(-100.0..100.0);
        for _ in 0..n {
            t.push(now);
            now += rng.random_range(0.5..30.0);
        }
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-50.0..50.0));
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1e3..1e3)).collect();
        let values: Vec<Vec<f64>> = t.iter().zip(&v).map(|(&ti, &vi)| vec![a * ti + b, vi]).collect();
        let s = RawSeries::new(t.clone(), values).map_err(|e| e.to_string())?;
        let lo = s.start().ceil();
        if lo > s.end() {
            continue;
        }
        let out = resample_linear(&s, 20, lo, s.end()).map_err(|e| e.to_string())?;
        for (k, o) in out.iter().enumerate() {
            let tk = lo + (k * 20) as f64;
            worst_affine = worst_affine.max((o[0] - (a * tk + b)).abs());
            let left = t.partition_point(|&x| x <= tk) - 1;
            let right = (left + 1).min(n - 1);
            if o[1] < v[left].min(v[right]) || o[1] > v[left].max(v[right]) {
                bracket_violations += 1;
            }
        }
    }
    ok_if(
        worst_affine < 1e-12 && bracket_violations == 0,
        format!("{cases} random series on the 20 ms grid: max affine error {worst_affine:.1e} (< 1e-12), {bracket_violations} bracket violations"),
    )
}

// 6 -------------------------------------------------------------------------

fn threshold_plateau() -> Check {
    let plans = plan_batch(&Design { participants: 7, nothing: 1, rubber: 0, plastic: 0 }, &[Condition::Nothing], 99);
    let trials: Vec<TrialDataset<f64>> = plans
        .par_iter()
        .map(|p| p.generate(&SquatConfig::default(), &PressureModel::default()))
        .collect::<plantar::Result<_>>()
        .map_err(|e| e.to_string())?;
    let candidates = [0.10, 0.15, 0.20, 0.25];
    let (best, scores) = grid_search_threshold(&trials, &candidates, &PipelineConfig::default()).map_err(|e| e.to_string())?;
    let r2: Vec<f64> = scores.iter().filter_map(|s| s.mean_r2).collect();
    let spread = r2.iter().copied().fold(f64::MIN, f64::max) - r2.iter().copied().fold(f64::MAX, f64::min);
    ok_if(
        r2.len() == 4 && spread < 0.02,
        format!(
            "mean R² at 0.10/0.15/0.20/0.25 = {}; spread {spread:.4} (< 0.02), best {best}",
            r2.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join("/")
        ),
    )
}

// 7 -------------------------------------------------------------------------

fn round_trip() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let plan = &plan_batch(&Design { participants: 1, nothing: 0, rubber: 1, plastic: 0 }, &[Condition::Rubber], 7)[0];
    let trial = plan.generate(&SquatConfig::default(), &PressureModel::default()).map_err(|e| e.to_string())?;
    let pair = TrialFilePair {
        pressure: dir.path().join("p.csv"),
        angles: dir.path().join("a.csv"),
        trial_id: trial.trial_id.clone(),
        participant_id: trial.participant_id.clone(),
        condition: trial.condition,
        period_ms: trial.period_ms,
    };
    save_trial(&trial, &pair.pressure, &pair.angles).map_err(|e| e.to_string())?;
    let back: TrialDataset<f64> = load_trial(&pair).map_err(|e| e.to_string())?;
    let times_exact = back.frames.iter().zip(&trial.frames).all(|(a, b)| a.t_ms == b.t_ms) && back.len() == trial.len();
    let mut trial_err = 0.0f64;
    for (a, b) in back.frames.iter().zip(&trial.frames) {
        trial_err = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(trial_err, f64::max);
    }
    for (a, b) in back.angles.iter().zip(&trial.angles) {
        trial_err = a.to_array().iter().zip(b.to_array()).map(|(x, y)| (x - y).abs()).fold(trial_err, f64::max);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut pred_err = 0.0f64;
    let mut param_err = 0.0f64;
    let mut indices_exact = true;
    for k in 0..100 {
        let mut idx: Vec<usize> = (0..GRID_CELLS).filter(|_| rng.random_bool(0.1)).collect();
        if idx.is_empty() {
            idx.push(k);
        }
        let n = idx.len();
        let model = RidgeModel {
            channel: AngleChannel::ALL[k % 4],
            lambda: 10f64.powf(rng.random_range(-2.0..3.0)),
            selection: PixelSelection::new(idx, rng.random_range(0.0..0.5)).map_err(|e| e.to_string())?,
            pressure_z: ZScoreParams {
                mean: (0..n).map(|_| rng.random_range(0.0..5.0)).collect(),
                std: (0..n).map(|_| rng.random_range(0.01..3.0)).collect(),
            },
            angle_z: ZScoreParams { mean: vec![rng.random_range(-20.0..60.0)], std: vec![rng.random_range(1.0..30.0)] },
            weights: (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.1).collect(),
        };
        let path = dir.path().join(format!("m{k}.model"));
        save_model(&model, &path).map_err(|e| e.to_string())?;
        let loaded: RidgeModel<f64> = load_model(&path).map_err(|e| e.to_string())?;
        indices_exact &= loaded.selection.indices() == model.selection.indices();
        let nums = |m: &RidgeModel<f64>| -> Vec<f64> {
            [&m.weights, &m.pressure_z.mean, &m.pressure_z.std, &m.angle_z.mean, &m.angle_z.std].iter().flat_map(|v| v.iter().copied()).chain([m.lambda]).collect()
        };
        param_err = nums(&model).iter().zip(nums(&loaded)).map(|(a, b)| (a - b).abs()).fold(param_err, f64::max);
        let a = predict(&model, &trial.frames[..300]).map_err(|e| e.to_string())?;
        let b = predict(&loaded, &trial.frames[..300]).map_err(|e| e.to_string())?;
        pred_err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(pred_err, f64::max);
    }
    ok_if(
        times_exact && trial_err < 1e-9 && indices_exact && param_err < 1e-12 && pred_err < 1e-9,
        format!(
            "trial: timestamps exact, max value error {trial_err:.1e} (< 1e-9); 100 models: indices exact, parameter error {param_err:.1e} (< 1e-12), prediction error {pred_err:.1e} deg (< 1e-9)"
        ),
    )
}

// 8 -------------------------------------------------------------------------

fn files_under(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_plantar");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |args: &[&str]| -> Result<(), String> {
        let out = Command::new(bin).args(args).current_dir(dir.path()).env_remove("PLANTAR_OUT_DIR").output().map_err(|e| e.to_string())?;
        if out.status.success() { Ok(()) } else { Err(String::from_utf8_lossy(&out.stderr).into_owned()) }
    };
    run(&["synth", "--participants", "1", "--trials-per-condition", "3", "--duration-s", "12", "--seed", "3", "--out", "data", "--workers", "1"])?;
    run(&["pipeline", "--manifest", "data/manifest.toml", "--out", "run1", "--workers", "1"])?;
    run(&["pipeline", "--manifest", "data/manifest.toml", "--out", "run2", "--workers", "1"])?;
    let (r1, r2) = (dir.path().join("run1"), dir.path().join("run2"));
    let (f1, f2) = (files_under(&r1), files_under(&r2));
    let differing: Vec<String> = f1
        .iter()
        .filter(|f| std::fs::read(r1.join(f)).ok() != std::fs::read(r2.join(f)).ok())
        .map(|f| f.display().to_string())
        .collect();
    ok_if(
        f1 == f2 && differing.is_empty() && f1.len() > 3,
        format!("two `pipeline --workers 1` runs: {} files each, {} differ", f1.len(), differing.len()),
    )
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 8] = [
        ("ridge closed form vs gradient descent", ridge_exactness),
        ("linear-world recovery", linear_world),
        ("condition ablation on 77 synthetic trials", ablation),
        ("statistics fixtures", stats_fixtures),
        ("resampling exactness and bounds", resampling),
        ("selection threshold plateau", threshold_plateau),
        ("save/load round trips", round_trip),
        ("single-worker pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        let (tag, msg) = match outcome {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} [{}] {name} ({secs:.1} s): {msg}", i + 1);
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
