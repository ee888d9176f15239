use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, unparsable or inconsistent input.
    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Domain(#[from] gesture_core::Error),

    /// A gesture file that parses but violates its invariants.
    #[error("{path}: gesture is not valid\n{report}")]
    Invalid { path: String, report: String },
}

impl CliError {
    /// 1 for domain errors and invalid gestures, 2 for input errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Domain(gesture_core::Error::ConfigInvalid(_)) => 2,
            CliError::Domain(_) | CliError::Invalid { .. } => 1,
        }
    }
}
