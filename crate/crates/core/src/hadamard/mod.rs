//! Complex Hadamard matrices: representation, constructions, dephasing,
//! equivalence and regularity.

mod construct;
mod equiv;
mod io;
mod matrix;
mod named;
mod regular;

pub use construct::{dita_deform, dita_product, fourier, tensor};
pub use equiv::{
    equivalent, equivalent_with_budget, fingerprints, EquivalenceOutcome, DEFAULT_NODE_BUDGET,
};
pub use io::{
    format_matrix, parse_blog, parse_cmat, parse_matrix, parse_phase, read_matrix, write_blog,
    write_cmat, write_matrix,
};
pub use matrix::{
    dephase, dephase_at, is_hadamard, level, ButsonMatrix, ComplexHadamard, EquivalenceWitness,
    HadamardCheck, HadamardFailure, HadamardMatrix, Phase, DEFAULT_TOL,
};
pub use named::{bjorck_froberg_root, named, param_count, template, Cell, Template, REGISTRY};
pub use regular::{is_regular, PairProfile, RegularityReport};
