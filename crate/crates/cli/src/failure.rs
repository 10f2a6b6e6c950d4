//! Exit-code classification.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | input error: bad command line, unreadable or invalid input file, data a model cannot be fit on |
//! | 3 | internal error: an output could not be written, or an unexpected failure |

use std::fmt::Display;
use std::process::ExitCode;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn input(msg: impl Display) -> Self {
        Failure::Input(anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Input(_) => ExitCode::from(EXIT_INPUT),
            Failure::Internal(_) => ExitCode::from(EXIT_INTERNAL),
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Internal(e) => e,
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Attach context and an exit class to any error.
pub trait Classify<T> {
    fn input_err(self, context: impl Display) -> CliResult<T>;
    fn internal_err(self, context: impl Display) -> CliResult<T>;
}

impl<T, E> Classify<T> for Result<T, E>
where
    E: Into<anyhow::Error>,
{
    fn input_err(self, context: impl Display) -> CliResult<T> {
        self.map_err(|e| Failure::Input(e.into().context(context.to_string())))
    }

    fn internal_err(self, context: impl Display) -> CliResult<T> {
        self.map_err(|e| Failure::Internal(e.into().context(context.to_string())))
    }
}
