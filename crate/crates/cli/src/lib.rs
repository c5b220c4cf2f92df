//! Library side of the jetbound CLI: instance JSON formats, the
//! file-backed rank cache, and report emission. The binary in `main.rs`
//! wires these to the engine.

pub mod cache;
pub mod instance;
pub mod report;

/// CLI failure with its exit-code semantics: input errors exit 1,
/// internal errors exit 2.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Internal(msg) => write!(f, "internal: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<jetbound_core::Error> for CliError {
    fn from(e: jetbound_core::Error) -> Self {
        match e {
            jetbound_core::Error::Internal(msg) => CliError::Internal(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}
