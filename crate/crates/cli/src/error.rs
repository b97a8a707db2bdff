//! Exit-code discipline: 2 for bad configuration, 1 for a computation
//! that could not finish, 3 for validation failures. Every error leaves
//! a one-line JSON record on stderr so callers never have to parse prose.

use gradstorm_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Computation(String),
    Validation { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Computation(_) => 1,
            CliError::Validation { .. } => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Config(m) => ("config_error", m.clone()),
            CliError::Computation(m) => ("computation_error", m.clone()),
            CliError::Validation { failed } => (
                "validation_failure",
                format!("{failed} validation check(s) failed"),
            ),
        };
        serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            // bad user-supplied parameters are configuration problems
            CoreError::InvalidParameter { .. } => CliError::Config(e.to_string()),
            other => CliError::Computation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Computation(format!("io: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
