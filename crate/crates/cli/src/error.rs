use std::path::PathBuf;

/// Exit status for malformed input, bad options and unreadable files.
pub const EXIT_INPUT: u8 = 2;
/// Exit status for data outside a model's domain.
pub const EXIT_DOMAIN: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Core(#[from] fdao_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("no OS entropy available: {0}")]
    Entropy(getrandom::Error),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_domain() => EXIT_DOMAIN,
            _ => EXIT_INPUT,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
