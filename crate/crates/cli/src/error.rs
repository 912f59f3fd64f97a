use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] gfperc_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("kernel fails required conditions: {}", .0.join(", "))]
    Conditions(Vec<&'static str>),
    #[error("deterministic audit failed with {0} violations")]
    Audit(usize),
}

impl CliError {
    /// 2 for unusable input, 3 for failed deterministic audits, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Audit(_) => 3,
            CliError::Core(_) | CliError::Io(_) | CliError::Conditions(_) => 1,
        }
    }
}
