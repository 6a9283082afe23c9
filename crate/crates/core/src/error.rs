use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not unimodular (determinant {det})")]
    NotUnimodular { det: i128 },

    #[error("matrix is not square: expected {expected} columns in row {row}, found {found}")]
    NotSquare { row: usize, expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integer overflow in group arithmetic")]
    Overflow,

    #[error("ball exceeds element budget of {budget}")]
    ResourceLimit { budget: usize },

    #[error("control function grows too fast to be dominated by 3^s (tail ratio {ratio:.4})")]
    EtaTooFast { ratio: f64 },

    #[error("no basic neighbourhood contains the given point set")]
    Unfittable,

    #[error("invalid control pair: rho_minus({x}) = {lower} exceeds rho_plus({x}) = {upper}")]
    InvalidPair { x: f64, lower: f64, upper: f64 },

    #[error("function is not contracting: phi({x}) = {value} > {x}/2")]
    NotContracting { x: f64, value: f64 },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("input sequence does not converge to its stated limit (tail deviation {deviation:.4})")]
    NotConverging { deviation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),
}
