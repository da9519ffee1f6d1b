//! Run manifests: the trial files of an experiment plus pipeline overrides.

use std::path::{Path, PathBuf};

use plantar::io::TrialFilePair;
use plantar::Condition;
use serde::{Deserialize, Serialize};

use crate::config::PipelineLayer;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialEntry {
    pub id: String,
    pub participant: String,
    /// `A`, `B` or `C` (names such as `rubber` are accepted too).
    pub condition: String,
    pub pressure: PathBuf,
    pub angles: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_ms: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default, skip_serializing_if = "is_empty_layer")]
    pub pipeline: PipelineLayer,
    #[serde(default, rename = "trial")]
    pub trials: Vec<TrialEntry>,
}

fn is_empty_layer(l: &PipelineLayer) -> bool {
    *l == PipelineLayer::default()
}

impl RunManifest {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// Reads a manifest, resolving relative file paths against its directory
    /// and checking that every referenced file exists.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Core(plantar::Error::Io(format!("{}: {e}", path.display()))))?;
        let mut m = Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for t in &mut m.trials {
            for p in [&mut t.pressure, &mut t.angles] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
                if !p.is_file() {
                    return Err(CliError::Core(plantar::Error::Io(format!("trial {}: missing file {}", t.id, p.display()))));
                }
            }
        }
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> CliResult<()> {
        if self.trials.is_empty() {
            return Err(CliError::Usage("manifest lists no trials".into()));
        }
        let mut ids: Vec<&str> = self.trials.iter().map(|t| t.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::Config(format!("duplicate trial id {}", w[0])));
        }
        for t in &self.trials {
            t.condition()?;
            if t.period_ms.is_some_and(|p| p <= 0) {
                return Err(CliError::Config(format!("trial {}: period_ms must be positive", t.id)));
            }
        }
        Ok(())
    }

    pub fn pairs(&self, default_period_ms: i64) -> CliResult<Vec<TrialFilePair>> {
        self.trials.iter().map(|t| t.pair(default_period_ms)).collect()
    }
}

impl TrialEntry {
    pub fn condition(&self) -> CliResult<Condition> {
        self.condition.parse().map_err(|_| CliError::Config(format!("trial {}: unknown condition `{}`", self.id, self.condition)))
    }

    pub fn pair(&self, default_period_ms: i64) -> CliResult<TrialFilePair> {
        Ok(TrialFilePair {
            pressure: self.pressure.clone(),
            angles: self.angles.clone(),
            trial_id: self.id.clone(),
            participant_id: self.participant.clone(),
            condition: self.condition()?,
            period_ms: self.period_ms.unwrap_or(default_period_ms),
        })
    }
}
