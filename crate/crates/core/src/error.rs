use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Location-tagged failure while reading a `.blog` or `.cmat` payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid root-of-unity order {0}")]
    InvalidOrder(u32),
    #[error("exponent {exponent} is out of range for order {order}")]
    ExponentOutOfRange { exponent: u32, order: u32 },
    #[error("input is not a vanishing sum (residual {residual:.3e})")]
    NotVanishing { residual: f64 },
    #[error("value at index {index} has modulus {modulus}, expected 1")]
    NotUnimodular { index: usize, modulus: f64 },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("unknown matrix name {0:?}")]
    UnknownName(String),
    #[error("{name} expects {expected} parameter(s), got {got}")]
    MissingParameter {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("{what} needs {requested}, above the configured cap {cap}")]
    ResourceCap {
        what: &'static str,
        requested: u64,
        cap: u64,
    },
    #[error("sketched rank is not seed-stable: {first} vs {second}")]
    UnstableRank { first: usize, second: usize },
    #[error("invalid Latin square: {0}")]
    InvalidLatinSquare(String),
    #[error("invalid magic partition: {0}")]
    InvalidPartition(String),
    #[error("permutation group closure exceeded the cap of {cap} elements")]
    GroupTooLarge { cap: usize },
    #[error("rows {0} and {1} have a product that is neither binary nor ternary")]
    NotMixedRegular(usize, usize),
    #[error("classification failure: {0}")]
    ClassificationFailure(String),
    #[error("cell ({n},{l}) has witness {witness} but obstruction {obstruction} also fires")]
    InconsistentVerdict {
        n: u32,
        l: u32,
        witness: String,
        obstruction: String,
    },
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
