//! Layered settings: a TOML config file overrides command-line flags, which
//! override the built-in defaults.

use std::path::Path;

use plantar::synth::{Design, PressureModel, SquatConfig};
use plantar::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Pipeline settings where every field may be left unset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineLayer {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_parts: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation_parts: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_ms: Option<i64>,
}

impl PipelineLayer {
    /// Fields of `self` win; unset ones fall through to `lower`.
    pub fn over(&self, lower: &PipelineLayer) -> PipelineLayer {
        PipelineLayer {
            lambda: self.lambda.or(lower.lambda),
            threshold: self.threshold.or(lower.threshold),
            warmup_s: self.warmup_s.or(lower.warmup_s),
            train_parts: self.train_parts.or(lower.train_parts),
            validation_parts: self.validation_parts.or(lower.validation_parts),
            period_ms: self.period_ms.or(lower.period_ms),
        }
    }

    pub fn resolve(&self) -> CliResult<Settings> {
        let d = PipelineConfig::<f64>::default();
        let config = PipelineConfig {
            lambda: self.lambda.unwrap_or(d.lambda),
            threshold: self.threshold.unwrap_or(d.threshold),
            warmup_s: self.warmup_s.unwrap_or(d.warmup_s),
            train_parts: self.train_parts.unwrap_or(d.train_parts),
            validation_parts: self.validation_parts.unwrap_or(d.validation_parts),
        };
        config.validate()?;
        let period_ms = self.period_ms.unwrap_or(plantar::trial::DEFAULT_PERIOD_MS);
        if period_ms <= 0 {
            return Err(CliError::Config(format!("period_ms must be positive, got {period_ms}")));
        }
        Ok(Settings { config, period_ms })
    }
}

/// Fully resolved pipeline settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub config: PipelineConfig<f64>,
    pub period_ms: i64,
}

/// Synthetic-experiment settings where every field may be left unset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthLayer {
    pub participants: Option<usize>,
    /// Trials per participant for conditions A, B and C.
    pub trials_per_condition: Option<[usize; 3]>,
    pub seed: Option<u64>,
    pub duration_s: Option<f64>,
    pub squat_period_s: Option<f64>,
    pub sample_period_ms: Option<i64>,
    pub pose_noise_sd: Option<f64>,
    pub pose_noise_autocorr: Option<f64>,
    pub morphology_gain: Option<f64>,
    pub cop_gain: Option<f64>,
    pub tissue_noise_sd: Option<f64>,
    pub sensor_noise_sd: Option<f64>,
}

impl SynthLayer {
    pub fn over(&self, lower: &SynthLayer) -> SynthLayer {
        SynthLayer {
            participants: self.participants.or(lower.participants),
            trials_per_condition: self.trials_per_condition.or(lower.trials_per_condition),
            seed: self.seed.or(lower.seed),
            duration_s: self.duration_s.or(lower.duration_s),
            squat_period_s: self.squat_period_s.or(lower.squat_period_s),
            sample_period_ms: self.sample_period_ms.or(lower.sample_period_ms),
            pose_noise_sd: self.pose_noise_sd.or(lower.pose_noise_sd),
            pose_noise_autocorr: self.pose_noise_autocorr.or(lower.pose_noise_autocorr),
            morphology_gain: self.morphology_gain.or(lower.morphology_gain),
            cop_gain: self.cop_gain.or(lower.cop_gain),
            tissue_noise_sd: self.tissue_noise_sd.or(lower.tissue_noise_sd),
            sensor_noise_sd: self.sensor_noise_sd.or(lower.sensor_noise_sd),
        }
    }

    pub fn resolve(&self) -> CliResult<SynthSettings> {
        let ds = Design::default();
        let sq = SquatConfig::<f64>::default();
        let pm = PressureModel::<f64>::default();
        let [nothing, rubber, plastic] = self.trials_per_condition.unwrap_or([ds.nothing, ds.rubber, ds.plastic]);
        let design = Design { participants: self.participants.unwrap_or(ds.participants), nothing, rubber, plastic };
        if design.participants == 0 {
            return Err(CliError::Config("participants must be positive".into()));
        }
        let squat = SquatConfig {
            period_s: self.squat_period_s.unwrap_or(sq.period_s),
            duration_s: self.duration_s.unwrap_or(sq.duration_s),
            sample_period_ms: self.sample_period_ms.unwrap_or(sq.sample_period_ms),
            noise_sd: self.pose_noise_sd.unwrap_or(sq.noise_sd),
            noise_autocorr: self.pose_noise_autocorr.unwrap_or(sq.noise_autocorr),
            ..sq
        };
        squat.validate()?;
        let model = PressureModel {
            morphology_gain: self.morphology_gain.unwrap_or(pm.morphology_gain),
            cop_gain: self.cop_gain.unwrap_or(pm.cop_gain),
            tissue_noise_sd: self.tissue_noise_sd.unwrap_or(pm.tissue_noise_sd),
            sensor_noise_sd: self.sensor_noise_sd.unwrap_or(pm.sensor_noise_sd),
            ..pm
        };
        if [model.morphology_gain, model.cop_gain, model.tissue_noise_sd, model.sensor_noise_sd].iter().any(|v| !(*v >= 0.0)) {
            return Err(CliError::Config("synthetic model gains and noise levels must be non-negative".into()));
        }
        Ok(SynthSettings { design, squat, model, seed: self.seed.unwrap_or(0) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSettings {
    pub design: Design,
    pub squat: SquatConfig<f64>,
    pub model: PressureModel<f64>,
    pub seed: u64,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub workers: Option<usize>,
    #[serde(default)]
    pub pipeline: PipelineLayer,
    #[serde(default)]
    pub synth: SynthLayer,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Core(plantar::Error::Io(format!("{}: {e}", path.display()))))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn load_opt(path: Option<&Path>) -> CliResult<Self> {
        path.map_or(Ok(Self::default()), Self::load)
    }
}

/// Worker count: config file, then flag, then available parallelism.
pub fn resolve_workers(file: Option<usize>, flag: Option<usize>) -> CliResult<usize> {
    let n = file.or(flag).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(CliError::Config("workers must be at least 1".into()));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_beats_flag_beats_default() {
        let file = PipelineLayer { lambda: Some(3.0), ..Default::default() };
        let flags = PipelineLayer { lambda: Some(5.0), threshold: Some(0.2), ..Default::default() };
        let s = file.over(&flags).resolve().unwrap();
        assert_eq!(s.config.lambda, 3.0);
        assert_eq!(s.config.threshold, 0.2);
        assert_eq!(s.config.warmup_s, 3.0);
        assert_eq!(s.period_ms, 20);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let bad = PipelineLayer { period_ms: Some(0), ..Default::default() };
        assert_eq!(bad.resolve().unwrap_err().code(), "CONFIG_ERROR");
        let bad = PipelineLayer { lambda: Some(-1.0), ..Default::default() };
        assert!(bad.resolve().is_err());
        assert!(ConfigFile::parse("[pipeline]\nlamda = 1\n").is_err());
        assert!(resolve_workers(Some(0), None).is_err());
        assert_eq!(resolve_workers(Some(2), Some(5)).unwrap(), 2);
    }

    #[test]
    fn shipped_default_config_matches_builtins() {
        let text = include_str!("../../../configs/default.toml");
        let file = ConfigFile::parse(text).unwrap();
        assert_eq!(file.pipeline.resolve().unwrap(), PipelineLayer::default().resolve().unwrap());
        assert_eq!(file.synth.resolve().unwrap(), SynthLayer::default().resolve().unwrap());
    }
}
