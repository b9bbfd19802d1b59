use num_complex::Complex64;
use serde::Serialize;

use super::matrix::HadamardMatrix;
use crate::cyclotomic::{cycle_decompose, cycle_decompose_approx, ExponentMultiset};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairProfile {
    pub rows: (usize, usize),
    /// Sorted cycle sizes, or `None` if the product does not split into cycles.
    pub profile: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub pairs: Vec<PairProfile>,
    pub regular: bool,
}

/// Decomposes every row-pair product `(h_ik conj(h_jk))_k` into cycles:
/// exactly for Butson matrices, within the matrix tolerance otherwise.
pub fn is_regular(m: &HadamardMatrix) -> Result<RegularityReport> {
    let n = m.n();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let profile = match m {
                HadamardMatrix::Butson(b) => {
                    let l = b.level_bound();
                    let exps = (0..n)
                        .map(|k| (b.get(i, k) + l - b.get(j, k)) % l)
                        .collect();
                    cycle_decompose(&ExponentMultiset::new(l, exps)?)?.map(|d| d.profile())
                }
                HadamardMatrix::Complex(c) => {
                    let v: Vec<Complex64> =
                        (0..n).map(|k| c.get(i, k) * c.get(j, k).conj()).collect();
                    cycle_decompose_approx(&v, c.tol())?.map(|d| d.profile())
                }
            };
            pairs.push(PairProfile {
                rows: (i, j),
                profile,
            });
        }
    }
    let regular = pairs.iter().all(|p| p.profile.is_some());
    Ok(RegularityReport { pairs, regular })
}
