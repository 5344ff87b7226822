use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// A failure that ends the run. Each kind maps to one exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Usage(String),
    Io { path: PathBuf, message: String },
    Degenerate(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            message: err.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Degenerate(_) => "degenerate",
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Degenerate(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let message = match self {
            CliError::Validation(m) | CliError::Usage(m) | CliError::Degenerate(m) => m.clone(),
            CliError::Io { path, message } => format!("{}: {message}", path.display()),
        };
        // Keep the diagnostic on one line.
        let flat: Vec<&str> = message
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        write!(f, "error: {}: {}", self.kind(), flat.join("; "))
    }
}

impl From<dscomp::dialogue::LoadError> for CliError {
    fn from(e: dscomp::dialogue::LoadError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<dscomp::report::FormatError> for CliError {
    fn from(e: dscomp::report::FormatError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<dscomp::mstdecode::ScoreMatrixError> for CliError {
    fn from(e: dscomp::mstdecode::ScoreMatrixError) -> Self {
        CliError::Validation(format!("score matrix: {e}"))
    }
}

impl From<dscomp::stats::StatsError> for CliError {
    fn from(e: dscomp::stats::StatsError) -> Self {
        match e {
            dscomp::stats::StatsError::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Degenerate(other.to_string()),
        }
    }
}

impl From<dscomp::complexity::ConfigError> for CliError {
    fn from(e: dscomp::complexity::ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<dscomp::synth::SynthError> for CliError {
    fn from(e: dscomp::synth::SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}
