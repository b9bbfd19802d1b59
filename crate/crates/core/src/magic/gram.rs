use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::basis::{inner, MagicBasis};
use crate::cyclotomic::CyclotomicInt;
use crate::error::{Error, Result};

/// Entry cap for materialised higher Gram tensors.
pub const DEFAULT_GRAM_CAP: u64 = 1 << 24;

/// The base Gram matrix `G_{ia}^{jb} = <xi_ij, xi_ab>`, stored densely.
#[derive(Clone, Debug)]
pub struct Gram {
    n: usize,
    values: Vec<Complex64>,
    exact: Option<Vec<CyclotomicInt>>,
}

impl Gram {
    fn index(&self, i: usize, a: usize, j: usize, b: usize) -> usize {
        let n = self.n;
        ((i * n + a) * n + j) * n + b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `<xi_ij, xi_ab>`.
    pub fn get(&self, i: usize, a: usize, j: usize, b: usize) -> Complex64 {
        self.values[self.index(i, a, j, b)]
    }

    pub fn exact(&self, i: usize, a: usize, j: usize, b: usize) -> Option<&CyclotomicInt> {
        self.exact.as_ref().map(|e| &e[self.index(i, a, j, b)])
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Whether `<xi_ij, xi_ab>` vanishes: exactly when possible, otherwise
    /// up to `n * tol`.
    pub fn vanishes(&self, i: usize, a: usize, j: usize, b: usize, tol: f64) -> bool {
        match self.exact(i, a, j, b) {
            Some(z) => z.is_zero(),
            None => self.get(i, a, j, b).norm() <= self.n as f64 * tol,
        }
    }
}

/// The Gram matrix, using `sum_k h_ik conj(h_jk) conj(h_ak) h_bk` when the
/// basis comes from a Hadamard matrix (exactly, for Butson matrices).
pub fn gram(xi: &MagicBasis) -> Gram {
    let n = xi.n();
    let Some(h) = xi.origin() else {
        return gram_direct(xi);
    };
    let rows = h.rows();
    let mut values = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for a in 0..n {
            for j in 0..n {
                for b in 0..n {
                    values.push(
                        (0..n)
                            .map(|k| {
                                rows[i][k] * rows[j][k].conj() * rows[a][k].conj() * rows[b][k]
                            })
                            .sum(),
                    );
                }
            }
        }
    }
    let exact = xi.butson().map(|m| {
        let l = m.level_bound() as u64;
        let mut out = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for a in 0..n {
                for j in 0..n {
                    for b in 0..n {
                        let exps = (0..n).map(|k| {
                            (m.get(i, k) as u64 + m.get(b, k) as u64 + 2 * l
                                - m.get(j, k) as u64
                                - m.get(a, k) as u64)
                                % l
                        });
                        out.push(CyclotomicInt::from_exponents(l as u32, exps).unwrap());
                    }
                }
            }
        }
        out
    });
    Gram { n, values, exact }
}

/// The Gram matrix from inner products of the stored vectors.
pub fn gram_direct(xi: &MagicBasis) -> Gram {
    let n = xi.n();
    let mut values = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for a in 0..n {
            for j in 0..n {
                for b in 0..n {
                    values.push(inner(xi.vector(i, j), xi.vector(a, b)));
                }
            }
        }
    }
    Gram {
        n,
        values,
        exact: None,
    }
}

/// `G^k` as an `n^k x n^k` matrix; multi-indices are flattened with the
/// first coordinate most significant.
#[derive(Clone, Debug)]
pub struct GramTensor {
    pub k: usize,
    pub n: usize,
    values: Vec<Complex64>,
    exact: Option<Vec<CyclotomicInt>>,
}

impl GramTensor {
    pub fn dim(&self) -> usize {
        self.n.pow(self.k as u32)
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &x| acc * self.n + x)
    }

    pub fn get(&self, i: &[usize], j: &[usize]) -> Complex64 {
        self.values[self.flatten(i) * self.dim() + self.flatten(j)]
    }

    pub fn get_flat(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.dim() + j]
    }

    pub fn exact_flat(&self, i: usize, j: usize) -> Option<&CyclotomicInt> {
        self.exact.as_ref().map(|e| &e[i * self.dim() + j])
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }
}

pub fn higher_gram(xi: &MagicBasis, k: usize) -> Result<GramTensor> {
    higher_gram_with_cap(xi, k, DEFAULT_GRAM_CAP)
}

/// `G^k_{i_1..i_k, j_1..j_k} = prod_{t=k..2} G_{i_t i_{t-1}}^{j_t j_{t-1}}`.
pub fn higher_gram_with_cap(xi: &MagicBasis, k: usize, cap: u64) -> Result<GramTensor> {
    if k < 2 {
        return Err(Error::InvalidValue(format!("higher Gram order {k} < 2")));
    }
    let n = xi.n();
    let entries = (n as u64).checked_pow(2 * k as u32).unwrap_or(u64::MAX);
    if entries > cap {
        return Err(Error::ResourceCap {
            what: "higher Gram entries",
            requested: entries,
            cap,
        });
    }
    let g = gram(xi);
    let values = extend_chain(
        n,
        k,
        |i, a, j, b| g.get(i, a, j, b),
        Complex64::new(1.0, 0.0),
        |x, y| x * y,
    );
    let exact = if g.is_exact() {
        let one = CyclotomicInt::one(g.exact(0, 0, 0, 0).unwrap().order()).unwrap();
        Some(extend_chain(
            n,
            k,
            |i, a, j, b| g.exact(i, a, j, b).unwrap().clone(),
            one,
            |x, y| x * y,
        ))
    } else {
        None
    };
    Ok(GramTensor {
        k,
        n,
        values,
        exact,
    })
}

/// Builds `G^k` one coordinate at a time: `G^t` at `(I i_t, J j_t)` is
/// `G^{t-1}` at `(I, J)` times the factor linking the last coordinates.
fn extend_chain<T: Clone + Send + Sync>(
    n: usize,
    k: usize,
    factor: impl Fn(usize, usize, usize, usize) -> T + Sync,
    one: T,
    mul: impl Fn(&T, &T) -> T + Sync,
) -> Vec<T> {
    let mut cur = vec![one; n * n];
    let mut dim = n;
    for _ in 2..=k {
        let next_dim = dim * n;
        let next: Vec<T> = (0..next_dim)
            .into_par_iter()
            .flat_map_iter(|row| {
                let (pi, it) = (row / n, row % n);
                let last_i = pi % n;
                let cur = &cur;
                let factor = &factor;
                let mul = &mul;
                (0..next_dim).map(move |col| {
                    let (pj, jt) = (col / n, col % n);
                    mul(&cur[pi * dim + pj], &factor(it, last_i, jt, pj % n))
                })
            })
            .collect();
        cur = next;
        dim = next_dim;
    }
    cur
}

/// Edges `(i,l) - (r,j)` whenever `<xi_lj, xi_ir>` is non-zero.
#[derive(Clone, Debug, Serialize)]
pub struct GramGraph {
    pub n: usize,
    pub edges: Vec<((usize, usize), (usize, usize))>,
}

pub fn gram_graph(xi: &MagicBasis) -> GramGraph {
    let n = xi.n();
    let g = gram(xi);
    let mut edges = Vec::new();
    for i in 0..n {
        for l in 0..n {
            for r in 0..n {
                for j in 0..n {
                    if (i, l) < (r, j) && !g.vanishes(l, i, j, r, xi.tol()) {
                        edges.push(((i, l), (r, j)));
                    }
                }
            }
        }
    }
    GramGraph { n, edges }
}

impl GramGraph {
    pub fn components(&self) -> usize {
        let n2 = self.n * self.n;
        let mut parent: Vec<usize> = (0..n2).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        let mut count = n2;
        for &((a, b), (c, d)) in &self.edges {
            let (x, y) = (
                find(&mut parent, a * self.n + b),
                find(&mut parent, c * self.n + d),
            );
            if x != y {
                parent[x] = y;
                count -= 1;
            }
        }
        count
    }
}

pub fn components(g: &GramGraph) -> usize {
    g.components()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::{fourier, named, tensor, HadamardMatrix, Phase};
    use crate::magic::magic_from_hadamard;

    fn basis(h: HadamardMatrix) -> MagicBasis {
        magic_from_hadamard(&h)
    }

    #[test]
    fn fast_and_direct_paths_agree() {
        let q = Phase::Unit(Complex64::from_polar(1.0, 1.1));
        for h in [named("T", &[]).unwrap(), named("H", &[q]).unwrap()] {
            let xi = basis(h);
            let (a, b) = (gram(&xi), gram_direct(&xi));
            assert!(a
                .values
                .iter()
                .zip(&b.values)
                .all(|(x, y)| (x - y).norm() < 1e-9));
        }
    }

    #[test]
    fn fourier_gram_is_shift_delta() {
        let n = 4;
        let g = gram(&basis(fourier(n).into()));
        for (i, a, j, b) in (0..n.pow(4)).map(|t| (t / 64, t / 16 % 4, t / 4 % 4, t % 4)) {
            let want = if (i + n - j) % n == (a + n - b) % n {
                n as f64
            } else {
                0.0
            };
            assert!((g.get(i, a, j, b) - want).norm() < 1e-9);
            assert_eq!(g.exact(i, a, j, b).unwrap().is_zero(), want == 0.0);
        }
    }

    #[test]
    fn second_higher_gram_is_permuted_base_gram() {
        let xi = basis(named("T", &[]).unwrap());
        let (g, g2) = (gram(&xi), higher_gram(&xi, 2).unwrap());
        for (i, a, j, b) in (0..6usize.pow(4)).map(|t| (t / 216, t / 36 % 6, t / 6 % 6, t % 6)) {
            assert!((g.get(i, a, j, b) - g2.get(&[a, i], &[b, j])).norm() < 1e-9);
            assert_eq!(g.exact(i, a, j, b), g2.exact_flat(a * 6 + i, b * 6 + j));
        }
    }

    #[test]
    fn higher_gram_cap() {
        let xi = basis(fourier(4).into());
        assert!(matches!(
            higher_gram_with_cap(&xi, 3, 100),
            Err(Error::ResourceCap { cap: 100, .. })
        ));
        assert!(higher_gram(&xi, 1).is_err());
    }

    #[test]
    fn graph_components() {
        assert_eq!(gram_graph(&basis(fourier(3).into())).components(), 3);
        let f2: HadamardMatrix = fourier(2).into();
        assert_eq!(gram_graph(&basis(tensor(&f2, &f2))).components(), 4);
        let full = MagicBasis::from_vectors(1, vec![vec![Complex64::new(1.0, 0.0)]], 1e-9).unwrap();
        assert_eq!(gram_graph(&full).components(), 1);
    }
}
