use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{gcd, lcm32};
use crate::cyclotomic::CyclotomicInt;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

/// A unit-modulus scalar: either an exact root of unity
/// `exp(2*pi*i*num/den)` or an arbitrary point on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Phase {
    Root { num: u32, den: u32 },
    Unit(Complex64),
}

impl Phase {
    pub const ONE: Phase = Phase::Root { num: 0, den: 1 };

    /// `exp(2*pi*i*num/den)` in lowest terms.
    pub fn root(num: i64, den: u32) -> Phase {
        assert!(den > 0, "root of unity of order 0");
        let num = num.rem_euclid(den as i64) as u64;
        let g = gcd(num, den as u64).max(1);
        Phase::Root {
            num: (num / g) as u32,
            den: (den as u64 / g) as u32,
        }
    }

    pub fn unit(z: Complex64) -> Result<Phase> {
        if (z.norm() - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidValue(format!(
                "parameter {z} is not of modulus 1"
            )));
        }
        Ok(Phase::Unit(z))
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::Root { num, den } => Complex64::from_polar(1.0, TAU * num as f64 / den as f64),
            Phase::Unit(z) => z,
        }
    }

    pub fn conj(self) -> Phase {
        match self {
            Phase::Root { num, den } => Phase::root(-(num as i64), den),
            Phase::Unit(z) => Phase::Unit(z.conj()),
        }
    }

    pub fn mul(self, rhs: Phase) -> Phase {
        match (self, rhs) {
            (Phase::Root { num: a, den: d }, Phase::Root { num: b, den: e }) => {
                let l = lcm32(d, e);
                Phase::root((a * (l / d) + b * (l / e)) as i64, l)
            }
            _ => Phase::Unit(self.to_complex() * rhs.to_complex()),
        }
    }

    /// Exponent of this root at level `level`, if it is an exact root whose
    /// order divides `level`.
    pub fn exponent_at(self, level: u32) -> Option<u32> {
        match self {
            Phase::Root { num, den } if level.is_multiple_of(den) => Some(num * (level / den)),
            _ => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Root { num, den } => write!(f, "{num}/{den}"),
            Phase::Unit(z) => write!(f, "{},{}", z.re, z.im),
        }
    }
}

/// An `n x n` matrix of `level`-th roots of unity, stored by exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ButsonMatrix {
    n: usize,
    level: u32,
    exps: Vec<u32>,
}

impl ButsonMatrix {
    pub fn new(n: usize, level: u32, exps: Vec<u32>) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if exps.len() != n * n {
            return Err(Error::Shape(format!(
                "{} exponents for a {n}x{n} matrix",
                exps.len()
            )));
        }
        if let Some(&e) = exps.iter().find(|&&e| e >= level) {
            return Err(Error::ExponentOutOfRange {
                exponent: e,
                order: level,
            });
        }
        Ok(Self { n, level, exps })
    }

    pub fn from_rows(level: u32, rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Shape(format!(
                "row of length {} in a matrix with {n} rows",
                r.len()
            )));
        }
        Self::new(n, level, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The root-of-unity order the exponents refer to (not necessarily minimal).
    pub fn level_bound(&self) -> u32 {
        self.level
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.exps[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.exps[i * self.n..(i + 1) * self.n]
    }

    /// Re-expresses the exponents at a multiple of the current level.
    pub fn at_level(&self, level: u32) -> ButsonMatrix {
        assert!(level.is_multiple_of(self.level));
        let f = level / self.level;
        ButsonMatrix {
            n: self.n,
            level,
            exps: self.exps.iter().map(|&e| e * f).collect(),
        }
    }

    pub fn to_complex(&self) -> ComplexHadamard {
        let l = self.level as f64;
        ComplexHadamard {
            n: self.n,
            entries: self
                .exps
                .iter()
                .map(|&e| Complex64::from_polar(1.0, TAU * e as f64 / l))
                .collect(),
            tol: DEFAULT_TOL,
        }
    }
}

/// The smallest `l'` such that every entry is an `l'`-th root of unity.
pub fn level(m: &ButsonMatrix) -> u32 {
    let g = m.exps.iter().fold(m.level as u64, |g, &e| gcd(g, e as u64));
    m.level / g as u32
}

/// A square matrix of unit-modulus complex numbers with an associated
/// comparison tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexHadamard {
    n: usize,
    entries: Vec<Complex64>,
    tol: f64,
}

impl ComplexHadamard {
    pub fn new(n: usize, entries: Vec<Complex64>, tol: f64) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Shape(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidValue(format!("tolerance {tol}")));
        }
        Ok(Self { n, entries, tol })
    }

    pub fn from_rows(rows: &[Vec<Complex64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Shape(format!(
                "row of length {} in a matrix with {n} rows",
                r.len()
            )));
        }
        Self::new(n, rows.concat(), tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HadamardMatrix {
    Butson(ButsonMatrix),
    Complex(ComplexHadamard),
}

impl From<ButsonMatrix> for HadamardMatrix {
    fn from(m: ButsonMatrix) -> Self {
        HadamardMatrix::Butson(m)
    }
}

impl From<ComplexHadamard> for HadamardMatrix {
    fn from(m: ComplexHadamard) -> Self {
        HadamardMatrix::Complex(m)
    }
}

impl HadamardMatrix {
    pub fn n(&self) -> usize {
        match self {
            HadamardMatrix::Butson(b) => b.n,
            HadamardMatrix::Complex(c) => c.n,
        }
    }

    pub fn tol(&self) -> f64 {
        match self {
            HadamardMatrix::Butson(_) => DEFAULT_TOL,
            HadamardMatrix::Complex(c) => c.tol,
        }
    }

    pub fn as_butson(&self) -> Option<&ButsonMatrix> {
        match self {
            HadamardMatrix::Butson(b) => Some(b),
            HadamardMatrix::Complex(_) => None,
        }
    }

    pub fn is_butson(&self) -> bool {
        matches!(self, HadamardMatrix::Butson(_))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            HadamardMatrix::Butson(b) => {
                Complex64::from_polar(1.0, TAU * b.get(i, j) as f64 / b.level as f64)
            }
            HadamardMatrix::Complex(c) => c.get(i, j),
        }
    }

    pub fn entry_phase(&self, i: usize, j: usize) -> Phase {
        match self {
            HadamardMatrix::Butson(b) => Phase::root(b.get(i, j) as i64, b.level),
            HadamardMatrix::Complex(c) => Phase::Unit(c.get(i, j)),
        }
    }

    /// Float view; Butson matrices are promoted with the default tolerance.
    pub fn to_complex(&self) -> ComplexHadamard {
        match self {
            HadamardMatrix::Butson(b) => b.to_complex(),
            HadamardMatrix::Complex(c) => c.clone(),
        }
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Entrywise comparison: exact for two Butson matrices, within `tol`
    /// otherwise.
    pub fn approx_eq(&self, other: &HadamardMatrix, tol: f64) -> bool {
        if self.n() != other.n() {
            return false;
        }
        if let (HadamardMatrix::Butson(a), HadamardMatrix::Butson(b)) = (self, other) {
            let l = lcm32(a.level, b.level);
            return a.at_level(l).exps == b.at_level(l).exps;
        }
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| (self.get(i, j) - other.get(i, j)).norm() <= tol))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HadamardFailure {
    NotUnimodular {
        row: usize,
        col: usize,
        modulus: f64,
    },
    NotOrthogonal {
        rows: (usize, usize),
        residual: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HadamardCheck {
    pub hadamard: bool,
    pub failure: Option<HadamardFailure>,
}

/// Unit modulus and pairwise row orthogonality; exact for Butson input.
pub fn is_hadamard(m: &HadamardMatrix) -> HadamardCheck {
    let fail = |f| HadamardCheck {
        hadamard: false,
        failure: Some(f),
    };
    let n = m.n();
    match m {
        HadamardMatrix::Butson(b) => {
            for i in 0..n {
                for j in i + 1..n {
                    let exps = (0..n).map(|k| {
                        (b.get(i, k) as u64 + b.level as u64 - b.get(j, k) as u64) % b.level as u64
                    });
                    let s = CyclotomicInt::from_exponents(b.level, exps)
                        .expect("level checked at construction");
                    if !s.is_zero() {
                        return fail(HadamardFailure::NotOrthogonal {
                            rows: (i, j),
                            residual: s.to_complex().norm(),
                        });
                    }
                }
            }
        }
        HadamardMatrix::Complex(c) => {
            for (k, z) in c.entries.iter().enumerate() {
                let modulus = z.norm();
                if (modulus - 1.0).abs() > c.tol {
                    return fail(HadamardFailure::NotUnimodular {
                        row: k / n,
                        col: k % n,
                        modulus,
                    });
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    let s: Complex64 = c
                        .row(i)
                        .iter()
                        .zip(c.row(j))
                        .map(|(a, b)| a * b.conj())
                        .sum();
                    if s.norm() > n as f64 * c.tol {
                        return fail(HadamardFailure::NotOrthogonal {
                            rows: (i, j),
                            residual: s.norm(),
                        });
                    }
                }
            }
        }
    }
    HadamardCheck {
        hadamard: true,
        failure: None,
    }
}

/// Row/column permutations and unit scalars mapping a source matrix `A` to
/// `B[i][j] = row_scalars[i] * col_scalars[j] * A[row_perm[i]][col_perm[j]]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceWitness {
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub row_scalars: Vec<Phase>,
    pub col_scalars: Vec<Phase>,
}

impl EquivalenceWitness {
    pub fn identity(n: usize) -> Self {
        Self {
            row_perm: (0..n).collect(),
            col_perm: (0..n).collect(),
            row_scalars: vec![Phase::ONE; n],
            col_scalars: vec![Phase::ONE; n],
        }
    }

    pub fn is_identity(&self) -> bool {
        let id = |p: &[usize]| p.iter().enumerate().all(|(i, &x)| i == x);
        let one = |s: &[Phase]| {
            s.iter()
                .all(|&p| (p.to_complex() - 1.0).norm() < DEFAULT_TOL)
        };
        id(&self.row_perm) && id(&self.col_perm) && one(&self.row_scalars) && one(&self.col_scalars)
    }

    pub fn apply(&self, m: &HadamardMatrix) -> Result<HadamardMatrix> {
        let n = m.n();
        if self.row_perm.len() != n || self.col_perm.len() != n {
            return Err(Error::SizeMismatch {
                left: self.row_perm.len(),
                right: n,
            });
        }
        let exact = |s: &[Phase]| {
            s.iter().try_fold(1u32, |l, p| match p {
                Phase::Root { den, .. } => Some(lcm32(l, *den)),
                Phase::Unit(_) => None,
            })
        };
        if let (HadamardMatrix::Butson(b), Some(lr), Some(lc)) =
            (m, exact(&self.row_scalars), exact(&self.col_scalars))
        {
            let l = lcm32(b.level, lcm32(lr, lc));
            let src = b.at_level(l);
            let mut exps = Vec::with_capacity(n * n);
            for i in 0..n {
                let a = self.row_scalars[i].exponent_at(l).unwrap();
                for j in 0..n {
                    let c = self.col_scalars[j].exponent_at(l).unwrap();
                    exps.push((a + c + src.get(self.row_perm[i], self.col_perm[j])) % l);
                }
            }
            return Ok(ButsonMatrix::new(n, l, exps)?.into());
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            let a = self.row_scalars[i].to_complex();
            for j in 0..n {
                let c = self.col_scalars[j].to_complex();
                entries.push(a * c * m.get(self.row_perm[i], self.col_perm[j]));
            }
        }
        Ok(ComplexHadamard::new(n, entries, m.tol())?.into())
    }

    /// The witness mapping the target back to the source.
    pub fn inverse(&self) -> Self {
        let n = self.row_perm.len();
        let mut row_perm = vec![0; n];
        let mut col_perm = vec![0; n];
        let mut row_scalars = vec![Phase::ONE; n];
        let mut col_scalars = vec![Phase::ONE; n];
        for i in 0..n {
            row_perm[self.row_perm[i]] = i;
            row_scalars[self.row_perm[i]] = self.row_scalars[i].conj();
            col_perm[self.col_perm[i]] = i;
            col_scalars[self.col_perm[i]] = self.col_scalars[i].conj();
        }
        Self {
            row_perm,
            col_perm,
            row_scalars,
            col_scalars,
        }
    }

    /// Whether applying the witness to `source` reproduces `target`.
    pub fn maps(&self, source: &HadamardMatrix, target: &HadamardMatrix, tol: f64) -> bool {
        self.apply(source)
            .map(|m| m.approx_eq(target, tol))
            .unwrap_or(false)
    }
}

/// Scales rows and columns so the first row and column are all ones.
pub fn dephase(m: &HadamardMatrix) -> (HadamardMatrix, EquivalenceWitness) {
    dephase_at(m, 0, 0)
}

/// Dephases about the entry `(r, c)`: row `r` and column `c` become all
/// ones, with no permutation applied.
pub fn dephase_at(m: &HadamardMatrix, r: usize, c: usize) -> (HadamardMatrix, EquivalenceWitness) {
    let n = m.n();
    let corner = m.entry_phase(r, c);
    let row_scalars: Vec<Phase> = (0..n).map(|i| m.entry_phase(i, c).conj()).collect();
    let col_scalars: Vec<Phase> = (0..n)
        .map(|j| m.entry_phase(r, j).conj().mul(corner))
        .collect();
    let w = EquivalenceWitness {
        row_perm: (0..n).collect(),
        col_perm: (0..n).collect(),
        row_scalars,
        col_scalars,
    };
    let out = w.apply(m).expect("witness has matching size");
    (out, w)
}
