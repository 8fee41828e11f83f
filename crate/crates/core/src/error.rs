use thiserror::Error;

/// Errors raised by the invariant algebra, jet engine, expression parser and
/// certificate routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("eigenvalues ({a}, {b}, {c}) are not traceless: |sum| = {sum:e}")]
    Trace { a: f64, b: f64, c: f64, sum: f64 },

    #[error("point (x = {x}, y = {y}) lies outside the admissible region: {reason}")]
    Region { x: f64, y: f64, reason: String },

    #[error("division by zero in jet arithmetic")]
    DivisionByZero,

    #[error("singular jet: {0}")]
    SingularJet(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("variable `{var}` at offset {offset} is not allowed in {mode} mode")]
    Mode {
        offset: usize,
        var: char,
        mode: &'static str,
    },

    #[error("exponent at offset {offset} must be a finite constant: {message}")]
    Exponent { offset: usize, message: String },

    #[error("Gram matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    Gram { min_eigenvalue: f64 },

    #[error("eigenvalue gap {gap:e} is below the floor {floor:e}")]
    Gap { gap: f64, floor: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("no admissible k up to {limit}")]
    NoSolution { limit: u64 },

    #[error("singular point of the Abel equation at z = {z} (numerator {numerator})")]
    SingularPoint { z: f64, numerator: f64 },

    #[error("constraint psi <= 0 violated at z = {z}: psi = {psi}")]
    ConstraintViolation { z: f64, psi: f64 },

    #[error("psi decreases at z = {z}")]
    MonotonicityFailure { z: f64 },

    #[error("inequality slack {slack:e} below tolerance at z = {z}")]
    SlackViolation { z: f64, slack: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
