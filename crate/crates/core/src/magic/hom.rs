//! Dimensions of the intertwiner spaces `Hom(u^k, u^l)`.
//!
//! `T` (an `n^l x n^k` matrix) is an intertwiner when
//! `(1 x T x 1) G^{k+2} = G^{l+2} (1 x T x 1)`, with the Gram tensors built
//! from the normalised basis vectors. Unknowns are indexed `I * n^k + J`.

use std::collections::HashSet;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::MagicBasis;
use super::gram::{gram, Gram};
use crate::arith::{is_prime, prime_divisors};
use crate::cyclotomic::CyclotomicInt;
use crate::error::{Error, Result};
use crate::linalg::{pow_mod, psd_rank, rank_full_pivot_above, ModularEchelon, NormalAccumulator};

pub const DEFAULT_UNKNOWN_CAP: u64 = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomMethod {
    /// Exact elimination for small Butson systems, dense floats for moderate
    /// ones, the sketch otherwise.
    #[default]
    Auto,
    /// The full constraint system: integer elimination over `Z[zeta]`
    /// modulo several primes for Butson sources with at most
    /// `exact_unknown_cap` unknowns and level at most `exact_order_cap`,
    /// floating point otherwise.
    ExactDense,
    RandomSketch,
}

#[derive(Clone, Debug)]
pub struct HomOptions {
    pub seed: u64,
    pub unknown_cap: u64,
    pub exact_unknown_cap: u64,
    /// Largest Butson level handled by exact elimination.
    pub exact_order_cap: u32,
    pub dense_row_cap: u64,
    /// Sketch functionals beyond the number of unknowns.
    pub oversample: usize,
    pub rel_tol: f64,
}

impl Default for HomOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            unknown_cap: DEFAULT_UNKNOWN_CAP,
            exact_unknown_cap: 100,
            exact_order_cap: 120,
            dense_row_cap: 1_000_000,
            oversample: 64,
            rel_tol: 1e-8,
        }
    }
}

pub fn hom_dim(xi: &MagicBasis, k: usize, l: usize, method: HomMethod) -> Result<u64> {
    hom_dim_with(xi, k, l, method, &HomOptions::default())
}

pub fn hom_dim_with(
    xi: &MagicBasis,
    k: usize,
    l: usize,
    method: HomMethod,
    opts: &HomOptions,
) -> Result<u64> {
    let n = xi.n() as u64;
    let unknowns = n.checked_pow((k + l) as u32).unwrap_or(u64::MAX);
    if unknowns > opts.unknown_cap {
        return Err(Error::ResourceCap {
            what: "intertwiner unknowns",
            requested: unknowns,
            cap: opts.unknown_cap,
        });
    }
    let sys = System::new(xi, k, l);
    let ends = if sys.pinned { 2 } else { 4 };
    let rows = n.checked_pow((k + l + ends) as u32).unwrap_or(u64::MAX);
    let exact_ok = xi
        .butson()
        .is_some_and(|b| b.level_bound() <= opts.exact_order_cap)
        && unknowns <= opts.exact_unknown_cap;
    match method {
        HomMethod::ExactDense if exact_ok => Ok(sys.exact_dim()),
        HomMethod::ExactDense => {
            if rows > opts.dense_row_cap {
                return Err(Error::ResourceCap {
                    what: "dense constraint rows",
                    requested: rows,
                    cap: opts.dense_row_cap,
                });
            }
            Ok(sys.dense_dim(opts.rel_tol))
        }
        HomMethod::RandomSketch => sys.sketch_dim(opts),
        HomMethod::Auto if exact_ok => Ok(sys.exact_dim()),
        HomMethod::Auto if rows <= opts.dense_row_cap && unknowns <= 1024 => {
            Ok(sys.dense_dim(opts.rel_tol))
        }
        HomMethod::Auto => sys.sketch_dim(opts),
    }
}

struct System {
    n: usize,
    k: usize,
    l: usize,
    gram: Gram,
    pinned: bool,
    /// Normalised Gram entries, indexed like `Gram`.
    unit: Vec<Complex64>,
}

impl System {
    fn new(xi: &MagicBasis, k: usize, l: usize) -> Self {
        let n = xi.n();
        let gram = gram(xi);
        let norms: Vec<f64> = (0..n * n)
            .map(|a| gram.get(a / n, a / n, a % n, a % n).re.sqrt())
            .collect();
        let mut unit = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for a in 0..n {
                for j in 0..n {
                    for b in 0..n {
                        unit.push(gram.get(i, a, j, b) / (norms[i * n + j] * norms[a * n + b]));
                    }
                }
            }
        }
        Self {
            n,
            k,
            l,
            gram,
            pinned: xi.origin().is_some(),
            unit,
        }
    }

    fn unknowns(&self) -> usize {
        self.n.pow((self.k + self.l) as u32)
    }

    fn g(&self, i: usize, a: usize, j: usize, b: usize) -> Complex64 {
        let n = self.n;
        self.unit[((i * n + a) * n + j) * n + b]
    }

    /// `G^m_{x,y}` for full index tuples.
    fn chain(&self, x: &[usize], y: &[usize]) -> Complex64 {
        (1..x.len())
            .map(|t| self.g(x[t], x[t - 1], y[t], y[t - 1]))
            .product()
    }

    fn chain_exact(&self, x: &[usize], y: &[usize]) -> CyclotomicInt {
        let mut acc = self.gram.exact(x[1], x[0], y[1], y[0]).unwrap().clone();
        for t in 2..x.len() {
            acc = &acc * self.gram.exact(x[t], x[t - 1], y[t], y[t - 1]).unwrap();
        }
        acc
    }

    fn digits(&self, mut v: usize, len: usize, out: &mut [usize]) {
        for d in out[..len].iter_mut().rev() {
            *d = v % self.n;
            v /= self.n;
        }
    }

    /// Calls `emit(x, y, I, J)` for every constraint row, indexed by
    /// `x = (p, I, r)` and `y = (q, J, s)`.
    ///
    /// For Hadamard-induced bases the rows depend on `(p, q)` through
    /// `conj(h_p) h_q` and on `(r, s)` through `h_r conj(h_s)`. With `p` and
    /// `r` fixed these already span all of `C^n`, so the rows with `p = r = 0`
    /// cut out the same space.
    fn for_each_row(&self, mut emit: impl FnMut(&[usize], &[usize], usize, usize)) {
        let (n, k, l) = (self.n, self.k, self.l);
        let mut x = vec![0; l + 2];
        let mut y = vec![0; k + 2];
        let outer_count = if self.pinned { n * n } else { n.pow(4) };
        for outer in 0..outer_count {
            let (p, r, q, s) = if self.pinned {
                (0, 0, outer / n, outer % n)
            } else {
                (
                    outer / (n * n * n),
                    outer / (n * n) % n,
                    outer / n % n,
                    outer % n,
                )
            };
            x[0] = p;
            x[l + 1] = r;
            y[0] = q;
            y[k + 1] = s;
            for ii in 0..n.pow(l as u32) {
                self.digits(ii, l, &mut x[1..]);
                for jj in 0..n.pow(k as u32) {
                    self.digits(jj, k, &mut y[1..]);
                    emit(&x, &y, ii, jj);
                }
            }
        }
    }

    /// Coefficients of one row: `T_{I,J'}` gets `G^{k+2}_{(pJ'r),(qJs)}` and
    /// `T_{I',J}` loses `G^{l+2}_{(pIr),(qI's)}`.
    fn float_row(
        &self,
        x: &[usize],
        y: &[usize],
        ii: usize,
        jj: usize,
        buf: &mut [usize],
        row: &mut [Complex64],
    ) {
        let (k, l) = (self.k, self.l);
        let nk = self.n.pow(k as u32);
        row.fill(Complex64::new(0.0, 0.0));
        let src = &mut buf[..k + 2];
        src[0] = x[0];
        src[k + 1] = x[l + 1];
        for j2 in 0..nk {
            self.digits(j2, k, &mut src[1..]);
            row[ii * nk + j2] += self.chain(src, y);
        }
        let tgt = &mut buf[..l + 2];
        tgt[0] = y[0];
        tgt[l + 1] = y[k + 1];
        for i2 in 0..self.n.pow(l as u32) {
            self.digits(i2, l, &mut tgt[1..]);
            row[i2 * nk + jj] -= self.chain(x, tgt);
        }
    }

    fn dense_dim(&self, rel_tol: f64) -> u64 {
        let unknowns = self.unknowns();
        let mut acc = NormalAccumulator::new(unknowns);
        let mut block: Vec<Vec<Complex64>> = Vec::new();
        let mut buf = vec![0; self.k.max(self.l) + 2];
        let mut row = vec![Complex64::new(0.0, 0.0); unknowns];
        let scale = 1e-12;
        self.for_each_row(|x, y, ii, jj| {
            self.float_row(x, y, ii, jj, &mut buf, &mut row);
            if row.iter().any(|z| z.norm() > scale) {
                block.push(row.clone());
                if block.len() == 2048 {
                    acc.add_rows(&block);
                    block.clear();
                }
            }
        });
        acc.add_rows(&block);
        (unknowns - psd_rank(acc.finish(), rel_tol)) as u64
    }

    /// Rank over `Z[zeta]` by elimination modulo several primes `p = 1 mod
    /// level`, with `zeta` sent to a primitive root of unity in `F_p`. Each
    /// reduction can only lose rank, so the largest modular rank is a lower
    /// bound that is attained unless every prime divides all maximal minors.
    fn exact_dim(&self) -> u64 {
        let (n, k, l) = (self.n, self.k, self.l);
        let unknowns = self.unknowns();
        let nk = n.pow(k as u32);
        let order = self.gram.exact(0, 0, 0, 0).unwrap().order();
        let zero = CyclotomicInt::zero(order).unwrap();
        let left_scale = (n as i64).pow(l as u32 + 1);
        let right_scale = (n as i64).pow(k as u32 + 1);
        let fields = residue_fields(order, MODULAR_PRIMES);
        let mut ech: Vec<ModularEchelon> = fields
            .iter()
            .map(|f| ModularEchelon::new(unknowns, f.p))
            .collect();
        let mut seen: HashSet<Vec<Vec<i64>>> = HashSet::new();
        let mut buf = vec![0; k.max(l) + 2];
        let mut row = vec![zero.clone(); unknowns];
        self.for_each_row(|x, y, ii, jj| {
            if ech.iter().all(ModularEchelon::is_full) {
                return;
            }
            row.fill(zero.clone());
            let src = &mut buf[..k + 2];
            src[0] = x[0];
            src[k + 1] = x[l + 1];
            for j2 in 0..nk {
                self.digits(j2, k, &mut src[1..]);
                let c = self.chain_exact(src, y).scale(left_scale);
                row[ii * nk + j2] = &row[ii * nk + j2] + &c;
            }
            let tgt = &mut buf[..l + 2];
            tgt[0] = y[0];
            tgt[l + 1] = y[k + 1];
            for i2 in 0..n.pow(l as u32) {
                self.digits(i2, l, &mut tgt[1..]);
                let c = self.chain_exact(x, tgt).scale(right_scale);
                row[i2 * nk + jj] = &row[i2 * nk + jj] - &c;
            }
            if row.iter().all(CyclotomicInt::is_zero) {
                return;
            }
            let key: Vec<Vec<i64>> = row.iter().map(|z| z.coeffs().to_vec()).collect();
            if seen.insert(key) {
                for (e, f) in ech.iter_mut().zip(&fields) {
                    if !e.is_full() {
                        e.push(row.iter().map(|z| f.eval(z)).collect());
                    }
                }
            }
        });
        let rank = ech.iter().map(ModularEchelon::rank).max().unwrap_or(0);
        (unknowns - rank) as u64
    }

    /// `out = G^m in` over `m`-tuples, contracting one coordinate at a time;
    /// `factor(x_t, x_{t-1}, y_t, y_{t-1})` is the chain factor with `x` the
    /// output and `y` the input index.
    fn contract(
        &self,
        m: usize,
        input: &[Complex64],
        factor: impl Fn(usize, usize, usize, usize) -> Complex64,
    ) -> Vec<Complex64> {
        let n = self.n;
        // z[(x_1..x_t), (y_t..y_m)]
        let mut z: Vec<Complex64> = (0..n).flat_map(|_| input.iter().copied()).collect();
        for t in 1..m {
            let xs = n.pow(t as u32);
            let tail = n.pow((m - t + 1) as u32);
            let rest = tail / n;
            let sub = rest / n;
            let mut next = vec![Complex64::new(0.0, 0.0); xs * n * rest];
            for xi in 0..xs {
                let xprev = xi % n;
                for xt in 0..n {
                    for yt in 0..n {
                        let out = ((xi * n + xt) * n + yt) * sub;
                        for yprev in 0..n {
                            let f = factor(xt, xprev, yt, yprev);
                            if f == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let src = xi * tail + yprev * rest + yt * sub;
                            for r in 0..sub {
                                next[out + r] += f * z[src + r];
                            }
                        }
                    }
                }
            }
            z = next;
        }
        let total = n.pow(m as u32);
        (0..total)
            .map(|x| z[x * n..x * n + n].iter().sum())
            .collect()
    }

    /// Sketch rows, each with the largest entrywise sum of term magnitudes
    /// (the scale that cancellation errors are relative to).
    fn sketch_rows(&self, seed: u64, count: usize) -> Vec<(Vec<Complex64>, f64)> {
        let (n, k, l) = (self.n, self.k, self.l);
        let (mu, mv) = (n.pow(l as u32 + 2), n.pow(k as u32 + 2));
        let (nk, nl) = (n.pow(k as u32), n.pow(l as u32));
        (0..count)
            .into_par_iter()
            .map(|f| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(f as u64);
                let mut gauss = || {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                };
                let u: Vec<Complex64> = (0..mu).map(|_| gauss()).collect();
                let v: Vec<Complex64> = (0..mv).map(|_| gauss()).collect();
                let w = self.contract(k + 2, &v, |xt, xp, yt, yp| self.g(xt, xp, yt, yp));
                let ubar: Vec<Complex64> = u.iter().map(|z| z.conj()).collect();
                let z = self.contract(l + 2, &ubar, |yt, yp, xt, xp| self.g(xt, xp, yt, yp));
                let mut row = vec![Complex64::new(0.0, 0.0); nl * nk];
                let mut mag = vec![0.0; nl * nk];
                for p in 0..n {
                    for r in 0..n {
                        for ii in 0..nl {
                            let cu = ubar[(p * nl + ii) * n + r];
                            for jj in 0..nk {
                                let t = cu * w[(p * nk + jj) * n + r];
                                row[ii * nk + jj] += t;
                                mag[ii * nk + jj] += t.norm();
                            }
                        }
                    }
                }
                for q in 0..n {
                    for s in 0..n {
                        for ii in 0..nl {
                            let cz = z[(q * nl + ii) * n + s];
                            for jj in 0..nk {
                                let t = cz * v[(q * nk + jj) * n + s];
                                row[ii * nk + jj] -= t;
                                mag[ii * nk + jj] += t.norm();
                            }
                        }
                    }
                }
                (row, mag.into_iter().fold(0.0, f64::max))
            })
            .collect()
    }

    fn sketch_dim(&self, opts: &HomOptions) -> Result<u64> {
        let unknowns = self.unknowns();
        let count = unknowns + opts.oversample;
        let dim = |seed| {
            let (rows, mags): (Vec<_>, Vec<f64>) =
                self.sketch_rows(seed, count).into_iter().unzip();
            let floor = opts.rel_tol * mags.into_iter().fold(0.0, f64::max);
            (unknowns - rank_full_pivot_above(rows, opts.rel_tol, floor)) as u64
        };
        let (first, second) = rayon::join(|| dim(opts.seed), || dim(opts.seed.wrapping_add(1)));
        if first != second {
            return Err(Error::UnstableRank {
                first: first as usize,
                second: second as usize,
            });
        }
        Ok(first)
    }
}

const MODULAR_PRIMES: usize = 3;

/// `F_p` together with the image `w` of `zeta_order`.
struct ResidueField {
    p: u64,
    powers: Vec<u64>,
}

impl ResidueField {
    fn eval(&self, z: &CyclotomicInt) -> u64 {
        let p = self.p as i64;
        z.coeffs()
            .iter()
            .zip(&self.powers)
            .fold(0u64, |acc, (&c, &w)| {
                (acc + c.rem_euclid(p) as u64 * w) % self.p
            })
    }
}

/// The `count` largest primes below `2^31` congruent to 1 modulo `order`.
fn residue_fields(order: u32, count: usize) -> Vec<ResidueField> {
    let l = order as u64;
    let qs = prime_divisors(l);
    let mut out = Vec::with_capacity(count);
    let mut p = ((1u64 << 31) - 1) / l * l + 1;
    while out.len() < count {
        if p > 1u64 << 31 {
            p -= l;
            continue;
        }
        if is_prime(p) {
            let w = (2..p)
                .map(|g| pow_mod(g, (p - 1) / l, p))
                .find(|&w| qs.iter().all(|&q| pow_mod(w, l / q, p) != 1))
                .expect("a primitive root exists");
            let powers = std::iter::successors(Some(1u64), |&x| Some(x * w % p))
                .take(order as usize)
                .collect();
            out.push(ResidueField { p, powers });
        }
        p -= l;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::{fourier, named, HadamardMatrix, Phase};
    use crate::magic::{gram_graph, magic_from_hadamard};

    fn xi(h: HadamardMatrix) -> MagicBasis {
        magic_from_hadamard(&h)
    }

    #[test]
    fn contraction_matches_chain() {
        let b = xi(named("T", &[]).unwrap());
        let sys = System::new(&b, 1, 0);
        let v: Vec<Complex64> = (0..216)
            .map(|t| Complex64::new((t % 7) as f64, (t % 5) as f64 - 2.0))
            .collect();
        let w = sys.contract(3, &v, |a, b, c, d| sys.g(a, b, c, d));
        let tuple = |t: usize| [t / 36, t / 6 % 6, t % 6];
        for x in [0, 17, 100, 215] {
            let want: Complex64 = (0..216)
                .map(|y| sys.chain(&tuple(x), &tuple(y)) * v[y])
                .sum();
            assert!((w[x] - want).norm() < 1e-9);
        }
    }

    #[test]
    fn fourier_small_cases_all_methods() {
        for n in 2..=3usize {
            let b = xi(fourier(n).into());
            for (k, l) in [(0, 1), (1, 0), (1, 1), (0, 2), (2, 1)] {
                let want = n.pow((k + l - 1) as u32) as u64;
                for m in [HomMethod::Auto, HomMethod::RandomSketch] {
                    assert_eq!(
                        hom_dim(&b, k, l, m).unwrap(),
                        want,
                        "n={n} k={k} l={l} {m:?}"
                    );
                }
                let float = xi(fourier(n).to_complex().into());
                assert_eq!(hom_dim(&float, k, l, HomMethod::ExactDense).unwrap(), want);
            }
        }
    }

    #[test]
    fn end_dimension_matches_components() {
        let q = Phase::Unit(Complex64::from_polar(1.0, 0.7));
        for h in [named("T", &[]).unwrap(), named("H", &[q]).unwrap()] {
            let b = xi(h.clone());
            let comps = gram_graph(&b).components() as u64;
            assert_eq!(hom_dim(&b, 1, 1, HomMethod::Auto).unwrap(), comps);
            assert_eq!(hom_dim(&b, 1, 1, HomMethod::RandomSketch).unwrap(), comps);
            assert_eq!(hom_dim(&b, 0, 1, HomMethod::Auto).unwrap(), 1);
        }
    }

    #[test]
    fn exact_and_float_agree_on_tao() {
        let t = named("T", &[]).unwrap();
        let exact = hom_dim(&xi(t.clone()), 1, 1, HomMethod::ExactDense).unwrap();
        let float = hom_dim(&xi(t.to_complex().into()), 1, 1, HomMethod::ExactDense).unwrap();
        assert_eq!(exact, float);
    }

    #[test]
    fn residue_fields_carry_primitive_roots() {
        for order in [2, 3, 8, 12, 60] {
            let fields = residue_fields(order, MODULAR_PRIMES);
            assert_eq!(fields.len(), MODULAR_PRIMES);
            for f in &fields {
                assert!(is_prime(f.p) && f.p < 1 << 31 && f.p % order as u64 == 1);
                let w = f.powers.get(1).copied().unwrap_or(1);
                assert_eq!(pow_mod(w, order as u64, f.p), 1);
                assert!(f.powers.iter().skip(1).all(|&x| x != 1));
                // zeta sums to zero over any full cycle, so its image must too.
                let cycle = CyclotomicInt::from_exponents(order, 0..order as u64).unwrap();
                assert_eq!(f.eval(&cycle), 0);
            }
        }
    }

    #[test]
    fn exact_and_float_agree_at_higher_levels() {
        for q in [Phase::root(1, 3), Phase::root(1, 8), Phase::root(1, 12)] {
            let h = named("H", &[q]).unwrap();
            for (k, l) in [(1, 1), (0, 2), (2, 0)] {
                let exact = hom_dim(&xi(h.clone()), k, l, HomMethod::ExactDense).unwrap();
                let float =
                    hom_dim(&xi(h.to_complex().into()), k, l, HomMethod::ExactDense).unwrap();
                assert_eq!(exact, float, "q = {q}, ({k},{l})");
            }
        }
    }

    #[test]
    fn pinned_rows_cut_out_the_same_space() {
        let q = Phase::Unit(Complex64::from_polar(1.0, 0.4));
        let h = named("H", &[q]).unwrap();
        let pinned = xi(h.clone());
        let n = h.n();
        let vectors = (0..n * n)
            .map(|a| pinned.vector(a / n, a % n).to_vec())
            .collect();
        let free = MagicBasis::from_vectors(n, vectors, 1e-9).unwrap();
        for (k, l) in [(1, 1), (0, 2)] {
            assert_eq!(
                hom_dim(&free, k, l, HomMethod::ExactDense).unwrap(),
                hom_dim(&pinned, k, l, HomMethod::ExactDense).unwrap()
            );
        }
    }

    #[test]
    fn caps() {
        let b = xi(fourier(3).into());
        let opts = HomOptions {
            unknown_cap: 10,
            ..HomOptions::default()
        };
        assert!(matches!(
            hom_dim_with(&b, 2, 1, HomMethod::Auto, &opts),
            Err(Error::ResourceCap { cap: 10, .. })
        ));
    }
}
