use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use adrelight::relight::PipelineError;
use adrelight::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_BACKBONE: u8 = 4;
pub const EXIT_GEOMETRY: u8 = 5;

/// A failed command: exit code, stage tag and message.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub stage: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, stage: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            code,
            stage: stage.into(),
            message: message.to_string(),
        }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        Self::new(EXIT_USAGE, "args", message)
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(EXIT_IO, "io", format!("{}: {err}", path.display()))
    }

    /// Tags a core error with `stage` and picks the exit code from its kind.
    pub fn from_core(stage: &str, err: Error) -> Self {
        Self::new(exit_code(&err), stage, err)
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.stage, self.message)
    }
}

pub fn exit_code(err: &Error) -> u8 {
    if err.is_io() {
        EXIT_IO
    } else if err.is_backbone() {
        EXIT_BACKBONE
    } else if err.is_geometry() {
        EXIT_GEOMETRY
    } else {
        EXIT_USAGE
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        Self::new(exit_code(&e.source), e.stage.name(), e.source)
    }
}

pub type CliResult<T> = Result<T, CliError>;
