//! Equivalence search under row/column permutations and unit scalings.
//!
//! Both matrices are dephased about a pair of corresponding pivots, which
//! reduces the problem to finding permutations `pi`, `sigma` with
//! `B'[i][j] = A'[pi(i)][sigma(j)]`. Rows of `B'` are assigned one at a time
//! while columns are kept in cells refined by the symbols seen so far; a
//! branch dies as soon as the cell sizes of the two sides disagree.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use super::matrix::{dephase_at, EquivalenceWitness, HadamardMatrix, Phase};
use crate::arith::lcm32;
use crate::error::{Error, Result};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
const FINGERPRINT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EquivalenceOutcome {
    Equivalent {
        witness: EquivalenceWitness,
    },
    NotEquivalent,
    /// The node budget ran out before the search finished.
    Undecided {
        nodes: u64,
    },
}

impl EquivalenceOutcome {
    pub fn witness(&self) -> Option<&EquivalenceWitness> {
        match self {
            EquivalenceOutcome::Equivalent { witness } => Some(witness),
            _ => None,
        }
    }
}

/// Searches for `W` with `W(a) = b`, using the default node budget.
pub fn equivalent(a: &HadamardMatrix, b: &HadamardMatrix) -> Result<EquivalenceOutcome> {
    equivalent_with_budget(a, b, DEFAULT_NODE_BUDGET)
}

pub fn equivalent_with_budget(
    a: &HadamardMatrix,
    b: &HadamardMatrix,
    budget: u64,
) -> Result<EquivalenceOutcome> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: b.n(),
        });
    }
    let tol = symbol_tol(a, b);
    let ca = a.rows();
    let cb = b.rows();
    let (ra, rb) = (fingerprints(&ca), fingerprints(&cb));
    let (ka, kb) = (fingerprints(&transpose(&ca)), fingerprints(&transpose(&cb)));
    if !same_multiset(&ra, &rb) || !same_multiset(&ka, &kb) {
        return Ok(EquivalenceOutcome::NotEquivalent);
    }
    let row_ok: Vec<Vec<bool>> = rb
        .iter()
        .map(|fb| ra.iter().map(|fa| close(fa, fb)).collect())
        .collect();
    let (b_dephased, _) = dephase_at(b, 0, 0);
    let mut nodes = 0u64;
    for r0 in (0..n).filter(|&r| row_ok[0][r]) {
        for c0 in (0..n).filter(|&c| close(&ka[c], &kb[0])) {
            let (a_dephased, _) = dephase_at(a, r0, c0);
            let (sa, sb) = symbolize(&a_dephased, &b_dephased, tol);
            let mut search = Search {
                n,
                sa: &sa,
                sb: &sb,
                row_ok: &row_ok,
                pi: vec![usize::MAX; n],
                used: vec![false; n],
                nodes: &mut nodes,
                budget,
            };
            search.pi[0] = r0;
            search.used[r0] = true;
            let mut cells_a = vec![1usize; n];
            let mut cells_b = vec![1usize; n];
            cells_a[c0] = 0;
            cells_b[0] = 0;
            let Some((cells_a, cells_b)) = refine(&sa[r0], &sb[0], &cells_a, &cells_b) else {
                continue;
            };
            match search.run(1, &cells_a, &cells_b) {
                Step::Found(pi, cells_a, cells_b) => {
                    let sigma = match_columns(&cells_a, &cells_b);
                    let w = scalars(a, b, &pi, &sigma);
                    if w.maps(a, b, tol) {
                        return Ok(EquivalenceOutcome::Equivalent { witness: w });
                    }
                }
                Step::Budget => return Ok(EquivalenceOutcome::Undecided { nodes }),
                Step::Dead => {}
            }
        }
    }
    Ok(EquivalenceOutcome::NotEquivalent)
}

fn symbol_tol(a: &HadamardMatrix, b: &HadamardMatrix) -> f64 {
    (a.tol().max(b.tol()) * 1e3).max(1e-9)
}

fn transpose(m: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = m.len();
    (0..n).map(|j| (0..n).map(|i| m[i][j]).collect()).collect()
}

/// Per row `i`: the sorted multiset of `|sum_k h_ik conj(h_jk) conj(h_ak) h_bk|`
/// over all `(j, a, b)`. Invariant under scalings and column permutations,
/// and permuted along with the rows.
pub fn fingerprints(h: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    let n = h.len();
    (0..n)
        .map(|i| {
            let mut v = Vec::with_capacity(n * n * n);
            for j in 0..n {
                let p: Vec<Complex64> = (0..n).map(|k| h[i][k] * h[j][k].conj()).collect();
                for a in 0..n {
                    for b in 0..n {
                        let s: Complex64 = (0..n).map(|k| p[k] * h[a][k].conj() * h[b][k]).sum();
                        v.push(s.norm());
                    }
                }
            }
            v.sort_by(f64::total_cmp);
            v
        })
        .collect()
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= FINGERPRINT_TOL)
}

fn same_multiset(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(
        |fa| match (0..b.len()).find(|&k| !used[k] && close(fa, &b[k])) {
            Some(k) => {
                used[k] = true;
                true
            }
            None => false,
        },
    )
}

/// Replaces entries by small integer symbols shared between both matrices:
/// exact exponents for Butson pairs, tolerance clusters otherwise.
fn symbolize(a: &HadamardMatrix, b: &HadamardMatrix, tol: f64) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let n = a.n();
    if let (Some(x), Some(y)) = (a.as_butson(), b.as_butson()) {
        let l = lcm32(x.level_bound(), y.level_bound());
        let (x, y) = (x.at_level(l), y.at_level(l));
        let rows = |m: &super::ButsonMatrix| (0..n).map(|i| m.row(i).to_vec()).collect();
        return (rows(&x), rows(&y));
    }
    let mut centers: Vec<Complex64> = Vec::new();
    let mut sym = |z: Complex64| -> u32 {
        match centers.iter().position(|c| (c - z).norm() <= tol) {
            Some(k) => k as u32,
            None => {
                centers.push(z);
                (centers.len() - 1) as u32
            }
        }
    };
    let sa = (0..n)
        .map(|i| (0..n).map(|j| sym(a.get(i, j))).collect())
        .collect();
    let sb = (0..n)
        .map(|i| (0..n).map(|j| sym(b.get(i, j))).collect())
        .collect();
    (sa, sb)
}

/// Splits column cells by the symbols of a newly matched row pair. Returns
/// `None` when the two sides stop having equal cell sizes.
fn refine(
    row_a: &[u32],
    row_b: &[u32],
    cells_a: &[usize],
    cells_b: &[usize],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut ids: HashMap<(usize, u32), usize> = HashMap::new();
    let mut count: Vec<i64> = Vec::new();
    let mut nb = Vec::with_capacity(row_b.len());
    for (j, &s) in row_b.iter().enumerate() {
        let next = ids.len();
        let id = *ids.entry((cells_b[j], s)).or_insert(next);
        if id == count.len() {
            count.push(0);
        }
        count[id] += 1;
        nb.push(id);
    }
    let mut na = Vec::with_capacity(row_a.len());
    for (j, &s) in row_a.iter().enumerate() {
        let id = *ids.get(&(cells_a[j], s))?;
        count[id] -= 1;
        if count[id] < 0 {
            return None;
        }
        na.push(id);
    }
    Some((na, nb))
}

enum Step {
    Found(Vec<usize>, Vec<usize>, Vec<usize>),
    Budget,
    Dead,
}

struct Search<'a> {
    n: usize,
    sa: &'a [Vec<u32>],
    sb: &'a [Vec<u32>],
    row_ok: &'a [Vec<bool>],
    pi: Vec<usize>,
    used: Vec<bool>,
    nodes: &'a mut u64,
    budget: u64,
}

impl Search<'_> {
    fn run(&mut self, i: usize, cells_a: &[usize], cells_b: &[usize]) -> Step {
        if i == self.n {
            return Step::Found(self.pi.clone(), cells_a.to_vec(), cells_b.to_vec());
        }
        for r in 0..self.n {
            if self.used[r] || !self.row_ok[i][r] {
                continue;
            }
            *self.nodes += 1;
            if *self.nodes > self.budget {
                return Step::Budget;
            }
            let Some((na, nb)) = refine(&self.sa[r], &self.sb[i], cells_a, cells_b) else {
                continue;
            };
            self.used[r] = true;
            self.pi[i] = r;
            match self.run(i + 1, &na, &nb) {
                Step::Dead => {}
                done => return done,
            }
            self.used[r] = false;
        }
        Step::Dead
    }
}

/// `sigma[j]` is the column of `A` matched to column `j` of `B`.
fn match_columns(cells_a: &[usize], cells_b: &[usize]) -> Vec<usize> {
    let mut taken = vec![false; cells_a.len()];
    cells_b
        .iter()
        .map(|&c| {
            let k = (0..cells_a.len())
                .find(|&k| !taken[k] && cells_a[k] == c)
                .expect("cell sizes agree");
            taken[k] = true;
            k
        })
        .collect()
}

/// Scalars forced by the permutations, normalised so that `alpha_0 = 1`.
fn scalars(
    a: &HadamardMatrix,
    b: &HadamardMatrix,
    pi: &[usize],
    sigma: &[usize],
) -> EquivalenceWitness {
    let n = a.n();
    let ratio = |i: usize, j: usize| {
        b.entry_phase(i, j)
            .mul(a.entry_phase(pi[i], sigma[j]).conj())
    };
    let col_scalars: Vec<Phase> = (0..n).map(|j| ratio(0, j)).collect();
    let row_scalars: Vec<Phase> = (0..n)
        .map(|i| ratio(i, 0).mul(col_scalars[0].conj()))
        .collect();
    EquivalenceWitness {
        row_perm: pi.to_vec(),
        col_perm: sigma.to_vec(),
        row_scalars,
        col_scalars,
    }
}
