use alloc::string::String;

/// Errors raised by the distance, generator and clustering routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid graph edit: {0}")]
    State(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("scenario generation failed: {0}")]
    Scenario(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
