pub mod arith;
pub mod classify6;
pub mod cyclotomic;
pub mod error;
pub mod hadamard;
pub mod linalg;
pub mod magic;
pub mod obstructions;

pub use error::{Error, ParseError, Result};
