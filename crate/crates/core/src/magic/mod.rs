//! Magic bases and the invariants attached to them.

mod basis;
mod gram;
mod hom;
mod latin;

pub use basis::{magic_from_hadamard, verify_magic, MagicBasis, MagicCheck, MagicFailure};
pub use gram::{
    components, gram, gram_direct, gram_graph, higher_gram, higher_gram_with_cap, Gram, GramGraph,
    GramTensor, DEFAULT_GRAM_CAP,
};
pub use hom::{hom_dim, hom_dim_with, HomMethod, HomOptions, DEFAULT_UNKNOWN_CAP};
pub use latin::{
    detect_latin, fourier_tensor_decompose, invariant_factors, latin_basis, latin_conjugate,
    latin_group, latin_group_with_cap, partition_group, partition_group_with_cap, LatinSquare,
    MagicPartition, PermGroup, DEFAULT_GROUP_CAP,
};
