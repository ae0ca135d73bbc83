//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("polynomial of degree >= 1 required")]
    NonConstantRequired,
    #[error("norm is indeterminate at the certified precision (known to be < q^{0})")]
    IndeterminateNorm(i64),
    #[error("precision too low: {0}")]
    Precision(String),
    #[error("singular input: {0}")]
    Singular(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a primitive approximation pair: gcd(a_1..a_d, b) != 1")]
    NotPrimitive,
    #[error("vector does not lie in the lattice: {0}")]
    NotInLattice(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error("certificate mismatch: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
