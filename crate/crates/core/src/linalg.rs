//! Numerical rank helpers for the intertwiner solvers.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Rank of a dense complex matrix (row-major rows) by Gaussian elimination
/// with full pivoting; pivots below `rel_tol` times the first pivot count
/// as zero.
pub fn rank_full_pivot(rows: Vec<Vec<Complex64>>, rel_tol: f64) -> usize {
    rank_full_pivot_above(rows, rel_tol, 0.0)
}

/// As [`rank_full_pivot`], but pivots at or below `floor` also count as
/// zero, so a matrix of pure rounding noise has rank 0.
pub fn rank_full_pivot_above(mut rows: Vec<Vec<Complex64>>, rel_tol: f64, floor: f64) -> usize {
    let m = rows.len();
    let Some(ncols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut cols: Vec<usize> = (0..ncols).collect();
    let mut first = None;
    for step in 0..m.min(ncols) {
        let mut best = (0.0, step, step);
        for (r, row) in rows.iter().enumerate().skip(step) {
            for (c, &col) in cols.iter().enumerate().skip(step) {
                let a = row[col].norm();
                if a > best.0 {
                    best = (a, r, c);
                }
            }
        }
        let (mag, r, c) = best;
        let first = *first.get_or_insert(mag);
        if mag <= floor || mag <= rel_tol * first {
            return step;
        }
        rows.swap(step, r);
        cols.swap(step, c);
        let pcol = cols[step];
        let (top, rest) = rows.split_at_mut(step + 1);
        let pivot = &top[step];
        let inv = 1.0 / pivot[pcol];
        for row in rest.iter_mut() {
            let f = row[pcol] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &col in &cols[step..] {
                row[col] -= f * pivot[col];
            }
        }
    }
    m.min(ncols)
}

/// Numerical rank of a Hermitian positive semidefinite matrix by pivoted
/// Cholesky, stopping once the largest remaining diagonal drops below
/// `rel_tol` times the largest initial diagonal.
pub fn psd_rank(mut a: DMatrix<Complex64>, rel_tol: f64) -> usize {
    let n = a.nrows();
    let scale = (0..n).map(|i| a[(i, i)].re).fold(0.0, f64::max);
    if scale <= 0.0 {
        return 0;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for step in 0..n {
        let (p, d) =
            (step..n)
                .map(|k| (k, a[(perm[k], perm[k])].re))
                .fold(
                    (step, f64::MIN),
                    |best, x| if x.1 > best.1 { x } else { best },
                );
        if d <= rel_tol * scale {
            return step;
        }
        perm.swap(step, p);
        let pk = perm[step];
        let root = d.sqrt();
        let col: Vec<Complex64> = perm[step + 1..]
            .iter()
            .map(|&r| a[(r, pk)] / root)
            .collect();
        for (x, &r) in perm[step + 1..].iter().enumerate() {
            for (y, &c) in perm[step + 1..].iter().enumerate() {
                a[(r, c)] -= col[x] * col[y].conj();
            }
        }
    }
    n
}

/// Accumulates `A^* A` for `A = X + iY` given as real blocks, so repeated
/// calls over row blocks of `A` build the Hermitian normal matrix.
pub(crate) struct NormalAccumulator {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl NormalAccumulator {
    pub fn new(n: usize) -> Self {
        Self {
            re: DMatrix::zeros(n, n),
            im: DMatrix::zeros(n, n),
        }
    }

    /// Adds the rows of `block` (each of length `n`).
    pub fn add_rows(&mut self, block: &[Vec<Complex64>]) {
        if block.is_empty() {
            return;
        }
        let n = self.re.nrows();
        let x = DMatrix::from_fn(block.len(), n, |r, c| block[r][c].re);
        let y = DMatrix::from_fn(block.len(), n, |r, c| block[r][c].im);
        self.re.gemm_tr(1.0, &x, &x, 1.0);
        self.re.gemm_tr(1.0, &y, &y, 1.0);
        self.im.gemm_tr(1.0, &x, &y, 1.0);
        self.im.gemm_tr(-1.0, &y, &x, 1.0);
    }

    pub fn finish(self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.re.nrows(), self.re.ncols(), |r, c| {
            Complex64::new(self.re[(r, c)], self.im[(r, c)])
        })
    }
}

/// Incremental row echelon form over `F_p` with unit pivots.
pub(crate) struct ModularEchelon {
    p: u64,
    width: usize,
    pivots: Vec<(usize, Vec<u64>)>,
}

impl ModularEchelon {
    pub fn new(width: usize, p: u64) -> Self {
        debug_assert!(p < 1 << 31);
        Self {
            p,
            width,
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_full(&self) -> bool {
        self.pivots.len() == self.width
    }

    /// Adds a row of residues below `p`; returns whether the rank grew.
    pub fn push(&mut self, mut row: Vec<u64>) -> bool {
        let p = self.p;
        for (col, prow) in &self.pivots {
            let k = row[*col];
            if k == 0 {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(prow) {
                *x = (*x + (p - y) * k) % p;
            }
        }
        let Some(col) = row.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = pow_mod(row[col], p - 2, p);
        for x in row.iter_mut() {
            *x = *x * inv % p;
        }
        self.pivots.push((col, row));
        true
    }
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn full_pivot_ranks() {
        let rows = vec![
            vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)],
            vec![c(0.0, 1.0), c(-1.0, 0.0), c(0.0, 2.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        ];
        assert_eq!(rank_full_pivot(rows, 1e-8), 2);
        assert_eq!(rank_full_pivot(vec![vec![c(0.0, 0.0); 3]; 2], 1e-8), 0);
        assert_eq!(rank_full_pivot(vec![], 1e-8), 0);
        let noise = vec![vec![c(1e-17, 0.0), c(0.0, -3e-17)]];
        assert_eq!(rank_full_pivot(noise.clone(), 1e-8), 1);
        assert_eq!(rank_full_pivot_above(noise, 1e-8, 1e-8), 0);
    }

    #[test]
    fn normal_matrix_rank_matches() {
        let rows = [
            vec![c(1.0, 0.5), c(0.0, 1.0), c(2.0, -1.0), c(0.0, 0.0)],
            vec![c(2.0, 1.0), c(0.0, 2.0), c(4.0, -2.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 3.0), c(0.5, 0.0)],
        ];
        let mut acc = NormalAccumulator::new(4);
        acc.add_rows(&rows[..1]);
        acc.add_rows(&rows[1..]);
        let m = acc.finish();
        assert!(
            (m[(0, 1)] - (rows[0][0].conj() * rows[0][1] + rows[1][0].conj() * rows[1][1])).norm()
                < 1e-12
        );
        assert_eq!(psd_rank(m, 1e-8), 2);
    }

    #[test]
    fn modular_echelon_mod_7() {
        let mut ech = ModularEchelon::new(3, 7);
        assert!(ech.push(vec![1, 2, 3]));
        assert!(!ech.push(vec![2, 4, 6]));
        assert!(!ech.push(vec![0, 0, 0]));
        assert!(ech.push(vec![0, 1, 1]));
        assert!(!ech.push(vec![1, 3, 4]));
        assert_eq!(ech.rank(), 2);
        assert!(!ech.is_full());
        assert!(ech.push(vec![0, 0, 5]));
        assert!(ech.is_full());
        assert_eq!(pow_mod(3, 6, 7), 1);
    }
}
