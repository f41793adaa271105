use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {}", .0.join("; "))]
    ConfigInvalid(Vec<String>),

    #[error("experiment failed: {0}")]
    ExperimentFailed(String),

    #[error("golden mismatch: {}", .0.join("; "))]
    GoldenMismatch(Vec<String>),

    #[error("cannot write output: {0}")]
    Output(String),
}

impl From<xdwm::Error> for CliError {
    fn from(e: xdwm::Error) -> Self {
        CliError::ExperimentFailed(e.to_string())
    }
}

/// The JSON record written next to the outputs when a run fails.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub messages: Vec<String>,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigInvalid(_) => "ConfigInvalid",
            CliError::ExperimentFailed(_) => "ExperimentFailed",
            CliError::GoldenMismatch(_) => "GoldenMismatch",
            CliError::Output(_) => "ExperimentFailed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            CliError::ExperimentFailed(_) | CliError::Output(_) => 3,
            CliError::GoldenMismatch(_) => 4,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let messages = match self {
            CliError::ConfigInvalid(m) | CliError::GoldenMismatch(m) => m.clone(),
            CliError::ExperimentFailed(m) | CliError::Output(m) => vec![m.clone()],
        };
        ErrorRecord { error: self.kind(), messages }
    }
}
