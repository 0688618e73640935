use retroplan::policy::PolicyError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Input { path: String, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("policy backend unreachable: {0}")]
    PolicyUnreachable(String),
    #[error("schema mismatch in {path}:\n{diagnostics}")]
    Schema { path: String, diagnostics: String },
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Output { .. } => 1,
            CliError::Config(_) => 2,
            CliError::PolicyUnreachable(_) => 3,
            CliError::Schema { .. } => 4,
        }
    }

    pub fn input(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
        CliError::Input {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> CliError {
        match e {
            PolicyError::BackendUnavailable(m) => CliError::PolicyUnreachable(m),
            PolicyError::StrictWithoutLibrary => CliError::Config(e.to_string()),
            other => CliError::PolicyUnreachable(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
