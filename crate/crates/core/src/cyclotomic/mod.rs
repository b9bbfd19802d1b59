//! Exact arithmetic with roots of unity and decomposition of vanishing sums.

mod approx;
mod cycles;
mod field;
mod ring;

pub use approx::{
    cycle_decompose_approx, cycle_decompose_approx_with, ApproxCycle, ApproxDecomposition,
    DEFAULT_TOL,
};
pub use cycles::{
    cycle_decompose, lam_leung_member, sum_roots, Cycle, CycleDecomposition, ExponentMultiset,
};
pub use field::CyclotomicRational;
pub use ring::{cyclotomic_polynomial, CyclotomicInt};
