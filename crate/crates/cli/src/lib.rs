//! Library surface of the experiment runner, split out so integration
//! tests can drive experiments without spawning the binary.

pub mod artifacts;
pub mod config;
pub mod hash;
pub mod report;
pub mod runner;
pub mod svg;

/// Process-level failure classes, mapped to exit codes in `main`:
/// configuration problems exit 2, numeric or runtime failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}
