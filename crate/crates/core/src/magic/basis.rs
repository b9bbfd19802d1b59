use num_complex::Complex64;
use serde::Serialize;

use crate::cyclotomic::CyclotomicInt;
use crate::error::{Error, Result};
use crate::hadamard::{ButsonMatrix, HadamardMatrix};

/// An `n x n` array of vectors in `C^n` whose rows and columns are
/// orthogonal bases. Bases induced by a Hadamard matrix remember it, which
/// enables exact arithmetic (Butson) and the closed-form Gram entries.
#[derive(Clone, Debug)]
pub struct MagicBasis {
    n: usize,
    vectors: Vec<Vec<Complex64>>,
    origin: Option<HadamardMatrix>,
    tol: f64,
}

impl MagicBasis {
    /// `vectors[i * n + j]` is `xi_ij`.
    pub fn from_vectors(n: usize, vectors: Vec<Vec<Complex64>>, tol: f64) -> Result<Self> {
        if vectors.len() != n * n {
            return Err(Error::Shape(format!(
                "{} vectors for an {n}x{n} magic basis",
                vectors.len()
            )));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::Shape(format!(
                "vector of dimension {} in an {n}x{n} magic basis",
                v.len()
            )));
        }
        Ok(Self {
            n,
            vectors,
            origin: None,
            tol,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn vector(&self, i: usize, j: usize) -> &[Complex64] {
        &self.vectors[i * self.n + j]
    }

    pub fn origin(&self) -> Option<&HadamardMatrix> {
        self.origin.as_ref()
    }

    /// The Butson matrix the basis was built from, if any.
    pub fn butson(&self) -> Option<&ButsonMatrix> {
        self.origin.as_ref().and_then(HadamardMatrix::as_butson)
    }

    /// Exact coordinates of `xi_ij` for Butson-induced bases.
    pub fn exact_vector(&self, i: usize, j: usize) -> Option<Vec<CyclotomicInt>> {
        let b = self.butson()?;
        let l = b.level_bound();
        Some(
            (0..self.n)
                .map(|k| {
                    CyclotomicInt::root(l, ((b.get(i, k) + l - b.get(j, k)) % l) as u64)
                        .expect("positive level")
                })
                .collect(),
        )
    }
}

/// `xi_ij = h_i / h_j`, coordinatewise.
pub fn magic_from_hadamard(h: &HadamardMatrix) -> MagicBasis {
    let n = h.n();
    let rows = h.rows();
    let vectors = (0..n * n)
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            (0..n).map(|k| rows[i][k] / rows[j][k]).collect()
        })
        .collect();
    MagicBasis {
        n,
        vectors,
        origin: Some(h.clone()),
        tol: h.tol(),
    }
}

pub(crate) fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn inner_exact(x: &[CyclotomicInt], y: &[CyclotomicInt]) -> CyclotomicInt {
    x.iter()
        .zip(y)
        .map(|(a, b)| a * &b.conj())
        .reduce(|s, t| s + t)
        .expect("non-empty vectors")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MagicFailure {
    ZeroVector { at: (usize, usize) },
    RowNotOrthogonal { row: usize, cols: (usize, usize) },
    ColumnNotOrthogonal { col: usize, rows: (usize, usize) },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MagicCheck {
    pub magic: bool,
    pub failure: Option<MagicFailure>,
}

/// Row and column orthogonality, exact for Butson-induced bases.
pub fn verify_magic(xi: &MagicBasis) -> MagicCheck {
    let n = xi.n;
    let exact: Option<Vec<Vec<CyclotomicInt>>> = xi.butson().map(|_| {
        (0..n * n)
            .map(|ij| xi.exact_vector(ij / n, ij % n).unwrap())
            .collect()
    });
    let scale = xi
        .vectors
        .iter()
        .map(|v| inner(v, v).re)
        .fold(0.0, f64::max);
    let zero = |a: usize, b: usize| -> bool {
        match &exact {
            Some(e) => inner_exact(&e[a], &e[b]).is_zero(),
            None => {
                inner(&xi.vectors[a], &xi.vectors[b]).norm() <= n as f64 * xi.tol * scale.max(1.0)
            }
        }
    };
    let fail = |f| MagicCheck {
        magic: false,
        failure: Some(f),
    };
    for a in 0..n * n {
        if zero(a, a) {
            return fail(MagicFailure::ZeroVector { at: (a / n, a % n) });
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                if !zero(i * n + j, i * n + k) {
                    return fail(MagicFailure::RowNotOrthogonal {
                        row: i,
                        cols: (j, k),
                    });
                }
                if !zero(j * n + i, k * n + i) {
                    return fail(MagicFailure::ColumnNotOrthogonal {
                        col: i,
                        rows: (j, k),
                    });
                }
            }
        }
    }
    MagicCheck {
        magic: true,
        failure: None,
    }
}
