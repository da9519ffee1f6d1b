use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plantar::io::{self, ReportRow, TrialFilePair};
use plantar::{AngleChannel, Condition, EvalReport, Metric};
use plantar_cli::config::{resolve_workers, ConfigFile, PipelineLayer, SynthLayer};
use plantar_cli::pipeline;
use plantar_cli::{CliError, CliResult, RunManifest, DEFAULT_OUT_DIR, OUT_DIR_ENV};

/// Joint-angle estimation from plantar pressure: synthetic data, Ridge
/// readouts, evaluation and condition statistics.
///
/// Settings are layered: values from a `--config` file override command-line
/// flags, which override the built-in defaults (20 ms grid, 3 s warmup, 5:1
/// split, lambda 10, threshold 0.15).
#[derive(Parser, Debug)]
#[command(name = "plantar", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct PipelineFlags {
    /// Ridge penalty on standardized data [default: 10]
    #[arg(long)]
    lambda: Option<f64>,
    /// Pixel-selection threshold on max |r| [default: 0.15]
    #[arg(long)]
    threshold: Option<f64>,
    /// Seconds dropped from the start of each trial [default: 3]
    #[arg(long)]
    warmup_s: Option<f64>,
    /// Training:validation ratio, validation is the tail [default: 5:1]
    #[arg(long, value_name = "TRAIN:VAL")]
    split: Option<String>,
    /// Resampling period in milliseconds [default: 20]
    #[arg(long)]
    period_ms: Option<i64>,
}

impl PipelineFlags {
    fn layer(&self) -> CliResult<PipelineLayer> {
        let (train_parts, validation_parts) = match &self.split {
            None => (None, None),
            Some(s) => {
                let bad = || CliError::Usage(format!("--split expects TRAIN:VAL, got `{s}`"));
                let (a, b) = s.split_once(':').ok_or_else(bad)?;
                (Some(a.trim().parse().map_err(|_| bad())?), Some(b.trim().parse().map_err(|_| bad())?))
            }
        };
        Ok(PipelineLayer {
            lambda: self.lambda,
            threshold: self.threshold,
            warmup_s: self.warmup_s,
            train_parts,
            validation_parts,
            period_ms: self.period_ms,
        })
    }
}

#[derive(Args, Debug)]
struct RunFlags {
    /// TOML config file; its values override flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads [default: available parallelism]; 1 is fully deterministic
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic squat trials and a manifest referencing them
    Synth {
        /// Conditions to generate: a, b, c (repeatable or comma-separated) [default: all]
        #[arg(long, value_delimiter = ',')]
        condition: Vec<Condition>,
        /// Synthetic participants [default: 7]
        #[arg(long)]
        participants: Option<usize>,
        /// Trials per participant for A,B,C, or one count for all [default: 5,3,3]
        #[arg(long, value_delimiter = ',')]
        trials_per_condition: Vec<usize>,
        /// Base seed [default: 0]
        #[arg(long)]
        seed: Option<u64>,
        /// Trial length in seconds [default: 30]
        #[arg(long)]
        duration_s: Option<f64>,
        #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
        out: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Train a readout for one angle channel of one trial
    Train {
        #[arg(long)]
        pressure: PathBuf,
        #[arg(long)]
        angles: PathBuf,
        /// ankle, knee, hip or upper
        #[arg(long)]
        channel: AngleChannel,
        #[arg(long, default_value = "a")]
        condition: Condition,
        /// Model file [default: $PLANTAR_OUT_DIR/<channel>.model]
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: PipelineFlags,
    },
    /// Estimate angles from pressure with a trained model
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        pressure: PathBuf,
        /// Measured angles; adds a measured column and error metrics
        #[arg(long)]
        angles: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        period_ms: i64,
        /// Output CSV [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and evaluate every channel of a manifest or of one trial
    Eval {
        #[arg(long, conflicts_with_all = ["pressure", "angles"])]
        manifest: Option<PathBuf>,
        #[arg(long, requires = "angles")]
        pressure: Option<PathBuf>,
        #[arg(long, requires = "pressure")]
        angles: Option<PathBuf>,
        #[arg(long, default_value = "a")]
        condition: Condition,
        #[arg(long, default_value = "trial")]
        trial_id: String,
        #[arg(long, default_value = "participant")]
        participant: String,
        /// Report CSV [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
        #[command(flatten)]
        flags: PipelineFlags,
    },
    /// Compare two groups of evaluation reports per channel
    Stats {
        /// rmse or r2 [default: both]
        #[arg(long)]
        metric: Option<Metric>,
        /// Report CSV, or directory of report CSVs, for the first group
        #[arg(long)]
        group_a: PathBuf,
        #[arg(long)]
        group_b: PathBuf,
        /// Keep only reports of this condition in the first group
        #[arg(long)]
        condition_a: Option<Condition>,
        /// Keep only reports of this condition in the second group
        #[arg(long)]
        condition_b: Option<Condition>,
        /// Comparison CSV [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export |w| of a model as a 48x48 CSV and plain PGM
    Weightmap {
        #[arg(long)]
        model: PathBuf,
        /// Output stem; `.csv` and `.pgm` are appended [default: $PLANTAR_OUT_DIR/<model name>]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pick the selection threshold with the best mean validation R²
    Gridsearch {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.10,0.15,0.20,0.25")]
        thresholds: Vec<f64>,
        /// Only use trials of these conditions [default: all]
        #[arg(long, value_delimiter = ',')]
        condition: Vec<Condition>,
        /// Score CSV [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
        #[command(flatten)]
        flags: PipelineFlags,
    },
    /// Run the full experiment of a manifest: reports, summary, comparisons, models, weight maps
    Pipeline {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
        out: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        #[command(flatten)]
        flags: PipelineFlags,
    },
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT_DIR), PathBuf::from)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => Ok(io::write_text(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn settings(config: &ConfigFile, manifest: Option<&RunManifest>, flags: &PipelineFlags) -> CliResult<plantar_cli::Settings> {
    // config file > manifest > flags > defaults
    let mut layer = config.pipeline.clone();
    if let Some(m) = manifest {
        layer = layer.over(&m.pipeline);
    }
    layer.over(&flags.layer()?).resolve()
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth { condition, participants, trials_per_condition, seed, duration_s, out, run } => {
            let config = ConfigFile::load_opt(run.config.as_deref())?;
            let tpc = match trials_per_condition.as_slice() {
                [] => None,
                [n] => Some([*n; 3]),
                [a, b, c] => Some([*a, *b, *c]),
                other => return Err(CliError::Usage(format!("--trials-per-condition takes 1 or 3 counts, got {}", other.len()))),
            };
            let flags = SynthLayer { participants, trials_per_condition: tpc, seed, duration_s, ..Default::default() };
            let settings = config.synth.over(&flags).resolve()?;
            let conditions = if condition.is_empty() { Condition::ALL.to_vec() } else { condition };
            let pool = pipeline::pool(resolve_workers(config.workers, run.workers)?)?;
            let manifest = pipeline::synthesize(&settings, &conditions, &out, &pool)?;
            println!("wrote {} trials and {}", manifest.trials.len(), out.join("manifest.toml").display());
        }
        Command::Train { pressure, angles, channel, condition, out, config, flags } => {
            let config = ConfigFile::load_opt(config.as_deref())?;
            let s = settings(&config, None, &flags)?;
            let pair = TrialFilePair {
                pressure,
                angles,
                trial_id: "trial".into(),
                participant_id: "participant".into(),
                condition,
                period_ms: s.period_ms,
            };
            let trial = io::load_trial::<f64>(&pair)?;
            let fit = plantar::train_eval_trial(&trial, &s.config)?;
            let (model, report) = fit.channel(channel).as_ref().map_err(|e| CliError::Core(e.clone()))?;
            let path = out.unwrap_or_else(|| default_out_dir().join(format!("{channel}.model")));
            io::save_model(model, &path)?;
            println!(
                "{channel}: RMSE {:.2} deg, R² {:.3} on {} validation samples, {} pixels -> {}",
                report.rmse_deg,
                report.r2,
                report.n_validation,
                model.selection.len(),
                path.display()
            );
        }
        Command::Predict { model, pressure, angles, period_ms, out } => {
            let model = io::load_model::<f64>(&model)?;
            let ch = model.channel;
            let mut text = String::new();
            match angles {
                Some(angles) => {
                    let pair = TrialFilePair {
                        pressure,
                        angles,
                        trial_id: String::new(),
                        participant_id: String::new(),
                        condition: Condition::Nothing,
                        period_ms,
                    };
                    let trial = io::load_trial::<f64>(&pair)?;
                    let est = plantar::predict(&model, &trial.frames)?;
                    let measured = trial.angle_series(ch);
                    text += &format!("t_ms,{ch}_deg,measured_deg\n");
                    for ((f, e), m) in trial.frames.iter().zip(&est).zip(&measured) {
                        text += &format!("{},{},{}\n", f.t_ms, io::fmt_num(*e), io::fmt_num(*m));
                    }
                    eprintln!("{ch}: RMSE {:.2} deg, R² {:.3}", plantar::rmse(&measured, &est)?, plantar::r_squared(&measured, &est)?);
                }
                None => {
                    let raw = io::read_pressure_series::<f64>(&pressure)?;
                    let t0 = raw.start().ceil();
                    let grid = plantar::resample::resample_linear(&raw, period_ms, t0, raw.end())?;
                    let frames: Vec<plantar::PressureFrame<f64>> = grid
                        .into_iter()
                        .enumerate()
                        .map(|(k, v)| plantar::PressureFrame::new(t0 as i64 + k as i64 * period_ms, v))
                        .collect::<plantar::Result<_>>()?;
                    let est = plantar::predict(&model, &frames)?;
                    text += &format!("t_ms,{ch}_deg\n");
                    for (f, e) in frames.iter().zip(&est) {
                        text += &format!("{},{}\n", f.t_ms, io::fmt_num(*e));
                    }
                }
            }
            emit(out.as_deref(), &text)?;
        }
        Command::Eval { manifest, pressure, angles, condition, trial_id, participant, out, run, flags } => {
            let config = ConfigFile::load_opt(run.config.as_deref())?;
            let (pairs, s) = match (manifest, pressure, angles) {
                (Some(m), _, _) => {
                    let m = RunManifest::load(&m)?;
                    let s = settings(&config, Some(&m), &flags)?;
                    (m.pairs(s.period_ms)?, s)
                }
                (None, Some(pressure), Some(angles)) => {
                    let s = settings(&config, None, &flags)?;
                    let pair = TrialFilePair { pressure, angles, trial_id, participant_id: participant, condition, period_ms: s.period_ms };
                    (vec![pair], s)
                }
                _ => return Err(CliError::Usage("eval needs --manifest or both --pressure and --angles".into())),
            };
            let pool = pipeline::pool(resolve_workers(config.workers, run.workers)?)?;
            let outcomes = pipeline::evaluate_all(&pairs, &s.config, &pool);
            let rows: Vec<ReportRow<f64>> = outcomes.iter().flat_map(|o| o.rows.iter().cloned()).collect();
            emit(out.as_deref(), &io::reports_to_csv(&rows))?;
            if outcomes.iter().all(|o| o.failed()) {
                return Err(CliError::AllTrialsFailed(outcomes.len()));
            }
        }
        Command::Stats { metric, group_a, group_b, condition_a, condition_b, out } => {
            let a = group(read_reports(&group_a)?, condition_a, "a")?;
            let b = group(read_reports(&group_b)?, condition_b, "b")?;
            let metrics = metric.map_or(vec![Metric::Rmse, Metric::R2], |m| vec![m]);
            let mut rows = Vec::new();
            for m in metrics {
                for ch in AngleChannel::ALL {
                    rows.push(plantar::compare_conditions(&a, &b, m, ch)?);
                }
            }
            emit(out.as_deref(), &io::comparisons_to_csv(&rows))?;
        }
        Command::Weightmap { model, out } => {
            let m = io::load_model::<f64>(&model)?;
            let stem = out.unwrap_or_else(|| default_out_dir().join(model.file_stem().unwrap_or_default()));
            let (csv, pgm) = pipeline::write_weight_map(&m, &stem)?;
            println!("{}\n{}", csv.display(), pgm.display());
        }
        Command::Gridsearch { manifest, thresholds, condition, out, run, flags } => {
            let config = ConfigFile::load_opt(run.config.as_deref())?;
            let m = RunManifest::load(&manifest)?;
            let s = settings(&config, Some(&m), &flags)?;
            let pairs: Vec<TrialFilePair> =
                m.pairs(s.period_ms)?.into_iter().filter(|p| condition.is_empty() || condition.contains(&p.condition)).collect();
            let pool = pipeline::pool(resolve_workers(config.workers, run.workers)?)?;
            let (best, scores) = pipeline::grid_search(&pairs, &thresholds, &s.config, &pool)?;
            let mut text = String::from("threshold,mean_r2,best\n");
            for sc in &scores {
                text += &format!(
                    "{},{},{}\n",
                    io::fmt_num(sc.threshold),
                    sc.mean_r2.map_or(String::new(), io::fmt_num),
                    sc.threshold == best
                );
            }
            emit(out.as_deref(), &text)?;
        }
        Command::Pipeline { manifest, out, run, flags } => {
            let config = ConfigFile::load_opt(run.config.as_deref())?;
            let m = RunManifest::load(&manifest)?;
            let s = settings(&config, Some(&m), &flags)?;
            let pool = pipeline::pool(resolve_workers(config.workers, run.workers)?)?;
            let summary = pipeline::run_pipeline(&m, &s, &out, &pool)?;
            for sk in &summary.skipped {
                eprintln!("warning[{}]: {} skipped: {}", sk.error.code(), sk.label, sk.error);
            }
            for line in summary.summary_csv.lines().skip(1) {
                let f: Vec<&str> = line.split(',').collect();
                println!("{} {:<6} n={:<3} RMSE {} deg  R² {}", f[0], f[1], f[2], f[7], f[8]);
            }
            println!(
                "{} trials ({} failed), {} reports, {} comparisons -> {}",
                summary.trials,
                summary.failed_trials,
                summary.reports,
                summary.comparisons,
                out.display()
            );
        }
    }
    Ok(())
}

/// Filters a report group to one condition; a group may not mix conditions.
fn group(reports: Vec<EvalReport<f64>>, condition: Option<Condition>, name: &str) -> CliResult<Vec<EvalReport<f64>>> {
    let reports: Vec<EvalReport<f64>> = match condition {
        Some(c) => reports.into_iter().filter(|r| r.condition == c).collect(),
        None => reports,
    };
    if reports.iter().any(|r| r.condition != reports[0].condition) {
        return Err(CliError::Usage(format!("group {name} mixes conditions; select one with --condition-{name}")));
    }
    Ok(reports)
}

/// Successful reports from a CSV file or from every report CSV in a directory.
fn read_reports(path: &Path) -> CliResult<Vec<EvalReport<f64>>> {
    let read = |p: &Path| -> CliResult<String> {
        std::fs::read_to_string(p).map_err(|e| CliError::Core(plantar::Error::Io(format!("{}: {e}", p.display()))))
    };
    if !path.is_dir() {
        return Ok(io::reports_from_csv(&read(path)?)?);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| CliError::Core(plantar::Error::Io(format!("{}: {e}", path.display()))))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let text = read(&f)?;
        if text.lines().next() == Some(io::REPORT_HEADER) {
            out.extend(io::reports_from_csv(&text)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!("no evaluation reports found in {}", path.display())));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[USAGE]: {} (see --help)", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
