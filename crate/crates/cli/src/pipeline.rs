//! Experiment orchestration shared by the subcommands.

use std::path::{Path, PathBuf};

use plantar::io::{self, ReportRow, TrialFilePair};
use plantar::preprocess::{pick_threshold, threshold_r2_sums, ThresholdScore};
use plantar::synth::TrialPlan;
use plantar::{
    compare_conditions, export_weight_map, train_eval_trial, AngleChannel, ComparisonResult, Condition, EvalReport,
    Metric, PipelineConfig, RidgeModel,
};
use rayon::prelude::*;

use crate::config::{Settings, SynthSettings};
use crate::error::{CliError, CliResult};
use crate::manifest::{RunManifest, TrialEntry};

/// Worker pool; one worker gives a fully sequential run.
pub fn pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))
}

/// Report rows and trained models of one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial_id: String,
    pub rows: Vec<ReportRow<f64>>,
    pub models: Vec<RidgeModel<f64>>,
}

impl TrialOutcome {
    pub fn reports(&self) -> impl Iterator<Item = &EvalReport<f64>> {
        self.rows.iter().filter_map(|r| match r {
            ReportRow::Ok(r) => Some(r),
            ReportRow::Failed { .. } => None,
        })
    }

    pub fn failed(&self) -> bool {
        self.models.is_empty()
    }
}

/// Loads, trains and evaluates one trial. Failures become report rows.
pub fn evaluate_pair(pair: &TrialFilePair, config: &PipelineConfig<f64>) -> TrialOutcome {
    let failed = |channel, error| ReportRow::Failed {
        trial_id: pair.trial_id.clone(),
        participant_id: pair.participant_id.clone(),
        condition: pair.condition,
        channel,
        error,
    };
    let fit = io::load_trial::<f64>(pair).and_then(|t| train_eval_trial(&t, config));
    let mut out = TrialOutcome { trial_id: pair.trial_id.clone(), rows: Vec::new(), models: Vec::new() };
    match fit {
        Err(e) => out.rows.push(failed(None, e)),
        Ok(fit) => {
            for (ch, res) in AngleChannel::ALL.iter().zip(fit.channels) {
                match res {
                    Ok((model, report)) => {
                        out.rows.push(ReportRow::Ok(report));
                        out.models.push(model);
                    }
                    Err(e) => out.rows.push(failed(Some(*ch), e)),
                }
            }
        }
    }
    out
}

/// Evaluates every pair on the pool; results keep the input order.
pub fn evaluate_all(pairs: &[TrialFilePair], config: &PipelineConfig<f64>, pool: &rayon::ThreadPool) -> Vec<TrialOutcome> {
    pool.install(|| pairs.par_iter().map(|p| evaluate_pair(p, config)).collect())
}

/// Condition pairings compared by the pipeline.
pub const PAIRINGS: [(Condition, Condition); 2] = [(Condition::Nothing, Condition::Rubber), (Condition::Nothing, Condition::Plastic)];

/// A comparison that could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedComparison {
    pub label: String,
    pub error: plantar::Error,
}

/// Every pairing × metric × channel comparison the reports support.
pub fn compare_all(reports: &[EvalReport<f64>]) -> (Vec<ComparisonResult<f64>>, Vec<SkippedComparison>) {
    let mut done = Vec::new();
    let mut skipped = Vec::new();
    for (a, b) in PAIRINGS {
        let ga: Vec<EvalReport<f64>> = reports.iter().filter(|r| r.condition == a).cloned().collect();
        let gb: Vec<EvalReport<f64>> = reports.iter().filter(|r| r.condition == b).cloned().collect();
        for metric in [Metric::Rmse, Metric::R2] {
            for ch in AngleChannel::ALL {
                match compare_conditions(&ga, &gb, metric, ch) {
                    Ok(c) => done.push(c),
                    Err(error) => skipped.push(SkippedComparison { label: format!("{a}-vs-{b} {metric} {ch}"), error }),
                }
            }
        }
    }
    (done, skipped)
}

/// Counts from a finished pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSummary {
    pub trials: usize,
    pub failed_trials: usize,
    pub reports: usize,
    pub failed_channels: usize,
    pub comparisons: usize,
    pub skipped: Vec<SkippedComparison>,
    pub summary_csv: String,
}

/// Runs the whole experiment described by `manifest` and writes
/// `reports.csv`, `summary.csv`, `comparisons.csv`, `settings.toml`, and one
/// model and weight map (CSV + PGM) per trained (trial, channel) pair.
pub fn run_pipeline(manifest: &RunManifest, settings: &Settings, out: &Path, pool: &rayon::ThreadPool) -> CliResult<PipelineSummary> {
    let pairs = manifest.pairs(settings.period_ms)?;
    if pairs.is_empty() {
        return Err(CliError::Usage("manifest lists no trials".into()));
    }
    let outcomes = evaluate_all(&pairs, &settings.config, pool);
    let failed_trials = outcomes.iter().filter(|o| o.failed()).count();
    if failed_trials == outcomes.len() {
        write_reports(out, &outcomes)?;
        return Err(CliError::AllTrialsFailed(failed_trials));
    }
    let reports: Vec<EvalReport<f64>> = outcomes.iter().flat_map(|o| o.reports().cloned()).collect();
    let rows = outcomes.iter().map(|o| o.rows.len()).sum::<usize>();
    let (comparisons, skipped) = compare_all(&reports);

    write_reports(out, &outcomes)?;
    let summary_csv = io::summary_to_csv(&reports);
    io::write_text(&out.join("summary.csv"), &summary_csv)?;
    io::write_text(&out.join("comparisons.csv"), &io::comparisons_to_csv(&comparisons))?;
    io::write_text(&out.join("settings.toml"), &settings_toml(settings))?;
    for o in &outcomes {
        for m in &o.models {
            let stem = format!("{}_{}", o.trial_id, m.channel);
            io::save_model(m, &out.join("models").join(format!("{stem}.model")))?;
            write_weight_map(m, &out.join("weightmaps").join(stem))?;
        }
    }
    Ok(PipelineSummary {
        trials: outcomes.len(),
        failed_trials,
        reports: reports.len(),
        failed_channels: rows - reports.len() - failed_trials,
        comparisons: comparisons.len(),
        skipped,
        summary_csv,
    })
}

fn write_reports(out: &Path, outcomes: &[TrialOutcome]) -> CliResult<()> {
    let rows: Vec<ReportRow<f64>> = outcomes.iter().flat_map(|o| o.rows.iter().cloned()).collect();
    io::write_text(&out.join("reports.csv"), &io::reports_to_csv(&rows))?;
    Ok(())
}

/// Resolved pipeline settings in config-file syntax.
pub fn settings_toml(s: &Settings) -> String {
    let c = &s.config;
    format!(
        "[pipeline]\nlambda = {:?}\nthreshold = {:?}\nwarmup_s = {:?}\ntrain_parts = {}\nvalidation_parts = {}\nperiod_ms = {}\n",
        c.lambda, c.threshold, c.warmup_s, c.train_parts, c.validation_parts, s.period_ms
    )
}

/// Writes `<stem>.csv` and `<stem>.pgm`.
pub fn write_weight_map(model: &RidgeModel<f64>, stem: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let map = export_weight_map(model);
    let csv = stem.with_extension("csv");
    let pgm = stem.with_extension("pgm");
    io::write_text(&csv, &map.to_csv())?;
    io::write_text(&pgm, &map.to_pgm())?;
    Ok((csv, pgm))
}

/// Generates the batch described by `settings` into `out/trials` and writes
/// `out/manifest.toml` referencing the files with relative paths.
pub fn synthesize(settings: &SynthSettings, conditions: &[Condition], out: &Path, pool: &rayon::ThreadPool) -> CliResult<RunManifest> {
    let plans = plantar::synth::plan_batch(&settings.design, conditions, settings.seed);
    if plans.is_empty() {
        return Err(CliError::Usage("the requested design contains no trials".into()));
    }
    let written: Vec<CliResult<TrialEntry>> = pool.install(|| plans.par_iter().map(|p| synth_one(p, settings, out)).collect());
    let manifest = RunManifest { trials: written.into_iter().collect::<CliResult<_>>()?, ..Default::default() };
    io::write_text(&out.join("manifest.toml"), &manifest.to_toml())?;
    Ok(manifest)
}

fn synth_one(plan: &TrialPlan, settings: &SynthSettings, out: &Path) -> CliResult<TrialEntry> {
    let trial = plan.generate(&settings.squat, &settings.model)?;
    let pressure = PathBuf::from("trials").join(format!("{}_pressure.csv", plan.trial_id));
    let angles = PathBuf::from("trials").join(format!("{}_angles.csv", plan.trial_id));
    io::save_trial(&trial, &out.join(&pressure), &out.join(&angles))?;
    Ok(TrialEntry {
        id: plan.trial_id.clone(),
        participant: plan.participant_id.clone(),
        condition: plan.condition.letter().to_string(),
        pressure,
        angles,
        period_ms: (settings.squat.sample_period_ms != plantar::trial::DEFAULT_PERIOD_MS).then_some(settings.squat.sample_period_ms),
    })
}

/// Threshold search over the trials of `pairs`, loading one trial at a time
/// per worker.
pub fn grid_search(
    pairs: &[TrialFilePair],
    candidates: &[f64],
    config: &PipelineConfig<f64>,
    pool: &rayon::ThreadPool,
) -> CliResult<(f64, Vec<ThresholdScore<f64>>)> {
    if pairs.is_empty() {
        return Err(CliError::Usage("no trials to search over".into()));
    }
    let sums: Vec<plantar::Result<Vec<Option<(f64, usize)>>>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|p| io::load_trial::<f64>(p).and_then(|t| threshold_r2_sums(&t, candidates, config)))
            .collect()
    });
    let sums = sums.into_iter().collect::<plantar::Result<Vec<_>>>()?;
    Ok(pick_threshold(candidates, &sums)?)
}
