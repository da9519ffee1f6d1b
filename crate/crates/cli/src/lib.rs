//! Library side of the `plantar` command: layered configuration, run
//! manifests and the experiment pipeline.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;

pub use config::{ConfigFile, PipelineLayer, Settings, SynthLayer, SynthSettings};
pub use error::{CliError, CliResult};
pub use manifest::{RunManifest, TrialEntry};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PLANTAR_OUT_DIR";

/// Output directory used when no `--out` is given.
pub const DEFAULT_OUT_DIR: &str = "plantar-out";
