use std::path::Path;

use artlab_core::analytics::AnalyticsError;
use artlab_core::dataset::DatasetError;
use artlab_core::instruments::InstrumentError;
use artlab_core::models::ModelError;
use artlab_core::synth::SynthError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Computation(_) => 3,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Prefixes a validation message with the offending file.
    pub fn in_file(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{}: {err}", path.display()))
    }
}

impl From<InstrumentError> for CliError {
    fn from(e: InstrumentError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParams(_) | ModelError::Format { .. } => CliError::Validation(e.to_string()),
            ModelError::Dataset(d) => d.into(),
            other => CliError::Computation(other.to_string()),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Model(m) => m.into(),
            AnalyticsError::Dataset(d) => d.into(),
            other => CliError::Computation(other.to_string()),
        }
    }
}
