use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    /// Gamma or digamma evaluated at a non-positive integer.
    #[error("pole of the Gamma function at x = {0}")]
    Pole(f64),
    /// Argument outside the admissible parameter range.
    #[error("domain error: {0}")]
    Domain(String),
    /// A quadrature or Monte-Carlo estimate missed its error target.
    #[error("not converged: {0}")]
    NotConverged(String),
    /// A symbolic Fourier transform hit a Gamma pole (point-supported distribution).
    #[error("Gamma pole in symbolic transform: {0}")]
    PoleEncountered(String),
    /// The symbol calculus was asked for something outside its term class.
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    /// Reading or writing a file failed.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Domain(msg.into()))
}
