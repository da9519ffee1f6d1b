//! Prints mean ± sd validation R² per condition and channel for a small
//! synthetic batch, to check the generator's default calibration.
//!
//! `cargo run --release -p plantar-core --example calibrate -- [participants] [seed]`

use plantar::synth::{plan_batch, Design, PressureModel, SquatConfig};
use plantar::{train_eval_trial, AngleChannel, Condition, PipelineConfig};

fn main() -> plantar::Result<()> {
    let mut args = std::env::args().skip(1);
    let participants = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    let design = Design { participants, ..Design::default() };
    let squat = SquatConfig::<f64>::default();
    let model = PressureModel::default();
    let config = PipelineConfig::default();
    let mut r2 = vec![vec![Vec::new(); 4]; 3];
    for plan in plan_batch(&design, &Condition::ALL, seed) {
        let trial = plan.generate(&squat, &model)?;
        let fit = train_eval_trial(&trial, &config)?;
        for report in fit.reports() {
            r2[plan.condition as usize][report.channel.index()].push(report.r2);
        }
        if plan.condition == Condition::Nothing {
            eprintln!("{}: {} pixels selected", plan.trial_id, fit.selection.len());
        }
    }
    for cond in Condition::ALL {
        let line: Vec<String> = AngleChannel::ALL
            .iter()
            .map(|ch| {
                let v = &r2[cond as usize][ch.index()];
                let m = v.iter().sum::<f64>() / v.len() as f64;
                let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1).max(1) as f64).sqrt();
                format!("{ch} {m:.3}±{sd:.3}")
            })
            .collect();
        println!("{cond}: {}", line.join("  "));
    }
    Ok(())
}
