use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::basis::{inner, magic_from_hadamard, MagicBasis};
use crate::arith::{factorize, lcm};
use crate::error::{Error, Result};
use crate::hadamard::HadamardMatrix;

pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

/// Entries are `1..=n`, as usual for Latin squares.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatinSquare {
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl LatinSquare {
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        let is_perm = |it: &mut dyn Iterator<Item = usize>| {
            let mut seen = vec![false; n];
            for v in it {
                if !(1..=n).contains(&v) || std::mem::replace(&mut seen[v - 1], true) {
                    return false;
                }
            }
            true
        };
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidLatinSquare(format!(
                    "row {} has length {}",
                    i + 1,
                    row.len()
                )));
            }
            if !is_perm(&mut row.iter().copied()) {
                return Err(Error::InvalidLatinSquare(format!(
                    "row {} is not a permutation",
                    i + 1
                )));
            }
        }
        for j in 0..n {
            if !is_perm(&mut rows.iter().map(|r| r[j])) {
                return Err(Error::InvalidLatinSquare(format!(
                    "column {} is not a permutation",
                    j + 1
                )));
            }
        }
        Ok(Self { n, rows })
    }

    /// `S_ij = ((i - j) mod n) + 1`.
    pub fn circulant(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| (i + n - j) % n + 1).collect())
            .collect();
        Self { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Zero-based indices, one-based value.
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.rows[i][j]
    }
}

impl fmt::Display for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// `S*_kj = i` whenever `S_ij = k`.
pub fn latin_conjugate(s: &LatinSquare) -> LatinSquare {
    let n = s.n;
    let mut rows = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[s.rows[i][j] - 1][j] = i + 1;
        }
    }
    LatinSquare { n, rows }
}

/// `xi_ij = e_{S_ij}`.
pub fn latin_basis(s: &LatinSquare) -> MagicBasis {
    let n = s.n;
    let vectors = (0..n * n)
        .map(|ij| {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[s.rows[ij / n][ij % n] - 1] = Complex64::new(1.0, 0.0);
            v
        })
        .collect();
    MagicBasis::from_vectors(n, vectors, 1e-9).expect("n^2 vectors of length n")
}

/// A magic partition: `sets[i][j]` is `E_ij`, a subset of `1..=ground`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MagicPartition {
    n: usize,
    ground: usize,
    sets: Vec<Vec<Vec<usize>>>,
}

impl MagicPartition {
    pub fn new(ground: usize, sets: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let n = sets.len();
        if sets.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidPartition(
                "the array of sets is not square".into(),
            ));
        }
        let covers = |cells: &mut dyn Iterator<Item = &Vec<usize>>| {
            let mut seen = vec![false; ground];
            for set in cells {
                for &k in set {
                    if !(1..=ground).contains(&k) || std::mem::replace(&mut seen[k - 1], true) {
                        return false;
                    }
                }
            }
            seen.iter().all(|&b| b)
        };
        for i in 0..n {
            if !covers(&mut sets[i].iter()) {
                return Err(Error::InvalidPartition(format!(
                    "row {} does not partition 1..={ground}",
                    i + 1
                )));
            }
            if !covers(&mut sets.iter().map(|r| &r[i])) {
                return Err(Error::InvalidPartition(format!(
                    "column {} does not partition 1..={ground}",
                    i + 1
                )));
            }
        }
        Ok(Self { n, ground, sets })
    }

    /// Singletons `E_ij = {S_ij}`.
    pub fn from_latin(s: &LatinSquare) -> Self {
        let sets = s
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| vec![v]).collect())
            .collect();
        Self {
            n: s.n,
            ground: s.n,
            sets,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn set(&self, i: usize, j: usize) -> &[usize] {
        &self.sets[i][j]
    }
}

/// A permutation group on `0..degree`, generated and closed explicitly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermGroup {
    pub degree: usize,
    pub generators: Vec<Vec<usize>>,
    pub order: u64,
    pub abelian: bool,
    /// Element order to number of elements of that order.
    pub order_histogram: BTreeMap<u64, u64>,
}

impl PermGroup {
    pub fn generate(degree: usize, generators: Vec<Vec<usize>>, cap: usize) -> Result<Self> {
        let mut gens: Vec<Vec<usize>> = Vec::new();
        for g in generators {
            if !gens.contains(&g) {
                gens.push(g);
            }
        }
        let identity: Vec<usize> = (0..degree).collect();
        let mut seen: HashSet<Vec<usize>> = HashSet::from([identity.clone()]);
        let mut queue = VecDeque::from([identity]);
        let mut histogram = BTreeMap::new();
        while let Some(p) = queue.pop_front() {
            *histogram.entry(perm_order(&p)).or_insert(0) += 1;
            for g in &gens {
                let q: Vec<usize> = p.iter().map(|&x| g[x]).collect();
                if seen.insert(q.clone()) {
                    if seen.len() > cap {
                        return Err(Error::GroupTooLarge { cap });
                    }
                    queue.push_back(q);
                }
            }
        }
        let commute = |a: &[usize], b: &[usize]| (0..degree).all(|x| a[b[x]] == b[a[x]]);
        let abelian = gens
            .iter()
            .enumerate()
            .all(|(k, a)| gens[k + 1..].iter().all(|b| commute(a, b)));
        Ok(Self {
            degree,
            generators: gens,
            order: seen.len() as u64,
            abelian,
            order_histogram: histogram,
        })
    }

    pub fn is_cyclic(&self) -> bool {
        self.abelian && self.order_histogram.contains_key(&self.order)
    }

    /// Invariant factors `d_1 | d_2 | ...` of an abelian group; `None` for
    /// non-abelian groups.
    pub fn invariant_factors(&self) -> Option<Vec<u64>> {
        self.abelian
            .then(|| invariant_factors(&self.order_histogram))
    }
}

fn perm_order(p: &[usize]) -> u64 {
    let mut seen = vec![false; p.len()];
    let mut order = 1;
    for start in 0..p.len() {
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        if len > 0 {
            order = lcm(order, len);
        }
    }
    order
}

/// Invariant factors of an abelian group from its element-order histogram.
pub fn invariant_factors(histogram: &BTreeMap<u64, u64>) -> Vec<u64> {
    let order: u64 = histogram.values().sum();
    // For each prime, the exponents of the cyclic p-factors, largest first.
    let mut primary: Vec<(u64, Vec<u32>)> = Vec::new();
    for (p, _) in factorize(order) {
        let mut ranks = Vec::new();
        let mut prev = 1u64;
        for e in 1.. {
            let pe = p.pow(e);
            let c: u64 = histogram
                .iter()
                .filter(|(o, _)| pe % **o == 0)
                .map(|(_, c)| c)
                .sum();
            if c == prev {
                break;
            }
            ranks.push((c / prev).ilog(p));
            prev = c;
        }
        // ranks[e-1] = number of factors with exponent >= e.
        let count = ranks.first().copied().unwrap_or(0);
        let exps = (0..count)
            .map(|f| ranks.iter().filter(|&&r| r > f).count() as u32)
            .collect();
        primary.push((p, exps));
    }
    let len = primary.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
    let mut factors: Vec<u64> = (0..len)
        .map(|f| {
            primary
                .iter()
                .map(|(p, e)| e.get(f).map_or(1, |&x| p.pow(x)))
                .product()
        })
        .collect();
    factors.reverse();
    factors
}

/// Generated by the rows of `S*`, read as `j -> S*_kj`.
pub fn latin_group(s: &LatinSquare) -> Result<PermGroup> {
    latin_group_with_cap(s, DEFAULT_GROUP_CAP)
}

pub fn latin_group_with_cap(s: &LatinSquare, cap: usize) -> Result<PermGroup> {
    let gens = latin_conjugate(s)
        .rows
        .iter()
        .map(|r| r.iter().map(|&v| v - 1).collect())
        .collect();
    PermGroup::generate(s.n, gens, cap)
}

/// Generated by `sigma_k(j) = i` whenever `k` lies in `E_ij`.
pub fn partition_group(e: &MagicPartition) -> Result<PermGroup> {
    partition_group_with_cap(e, DEFAULT_GROUP_CAP)
}

pub fn partition_group_with_cap(e: &MagicPartition, cap: usize) -> Result<PermGroup> {
    let n = e.n;
    let mut gens = vec![vec![0; n]; e.ground];
    for i in 0..n {
        for j in 0..n {
            for &k in &e.sets[i][j] {
                gens[k - 1][j] = i;
            }
        }
    }
    PermGroup::generate(n, gens, cap)
}

/// Splits the vectors into ray classes and returns the Latin square of class
/// labels (numbered by first appearance) when there are exactly `n` mutually
/// orthogonal classes.
pub fn detect_latin(xi: &MagicBasis) -> Option<LatinSquare> {
    let n = xi.n();
    let exact: Option<Vec<_>> = xi.butson().map(|_| {
        (0..n * n)
            .map(|a| xi.exact_vector(a / n, a % n).unwrap())
            .collect()
    });
    // Exact vectors have unit coordinates, so |<x,y>|^2 = n^2 means parallel.
    let relation = |a: usize, b: usize| -> Option<bool> {
        if let Some(e) = &exact {
            let g = super::basis::inner_exact(&e[a], &e[b]);
            if g.is_zero() {
                return Some(false);
            }
            let norm = (&g * &g.conj()).as_integer();
            return (norm == Some((n * n) as i64)).then_some(true);
        }
        let (x, y) = (xi.vector(a / n, a % n), xi.vector(b / n, b % n));
        let (nx, ny) = (inner(x, x).re, inner(y, y).re);
        let g = inner(x, y).norm();
        let scale = (nx * ny).sqrt();
        if g <= n as f64 * xi.tol() * scale {
            Some(false)
        } else if (g - scale).abs() <= n as f64 * xi.tol() * scale {
            Some(true)
        } else {
            None
        }
    };
    let mut reps: Vec<usize> = Vec::new();
    let mut label = vec![0; n * n];
    for a in 0..n * n {
        let mut found = None;
        for (c, &r) in reps.iter().enumerate() {
            if relation(a, r)? {
                found = Some(c);
                break;
            }
        }
        label[a] = match found {
            Some(c) => c,
            None => {
                if reps.len() == n {
                    return None;
                }
                reps.push(a);
                reps.len() - 1
            }
        };
    }
    if reps.len() != n {
        return None;
    }
    let rows = (0..n)
        .map(|i| (0..n).map(|j| label[i * n + j] + 1).collect())
        .collect();
    LatinSquare::new(rows).ok()
}

/// Invariant factors `[n_1, .., n_k]` with `h ~ F_{n_1} x .. x F_{n_k}`, if
/// the induced basis is Latin with an abelian group.
pub fn fourier_tensor_decompose(h: &HadamardMatrix) -> Option<Vec<u64>> {
    let s = detect_latin(&magic_from_hadamard(h))?;
    latin_group(&s).ok()?.invariant_factors()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::{fourier, named, tensor};

    fn square(rows: &[&str]) -> LatinSquare {
        LatinSquare::new(
            rows.iter()
                .map(|r| r.bytes().map(|b| (b - b'0') as usize).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(LatinSquare::new(vec![vec![1, 2], vec![1, 2]]).is_err());
        assert!(LatinSquare::new(vec![vec![1, 3], vec![2, 1]]).is_err());
        assert!(LatinSquare::new(vec![vec![1]]).is_ok());
        assert_eq!(latin_conjugate(&square(&["1"])), square(&["1"]));
    }

    #[test]
    fn circulant_conjugate() {
        let s = LatinSquare::circulant(4);
        assert_eq!(s, square(&["1432", "2143", "3214", "4321"]));
        let c = latin_conjugate(&s);
        assert_eq!(c, square(&["1234", "2341", "3412", "4123"]));
        assert_eq!(latin_conjugate(&c), s);
    }

    #[test]
    fn circulant_group_is_cyclic() {
        for n in 1..=7 {
            let g = latin_group(&LatinSquare::circulant(n)).unwrap();
            assert_eq!(g.order, n as u64);
            assert!(g.is_cyclic());
        }
    }

    #[test]
    fn invariant_factor_examples() {
        let hist = |pairs: &[(u64, u64)]| pairs.iter().copied().collect::<BTreeMap<_, _>>();
        assert_eq!(
            invariant_factors(&hist(&[(1, 1), (2, 1), (3, 2), (6, 2)])),
            vec![6]
        );
        assert_eq!(invariant_factors(&hist(&[(1, 1), (2, 3)])), vec![2, 2]);
        assert_eq!(
            invariant_factors(&hist(&[(1, 1), (2, 3), (4, 4)])),
            vec![2, 4]
        );
        assert_eq!(invariant_factors(&hist(&[(1, 1)])), Vec::<u64>::new());
        assert_eq!(
            invariant_factors(&hist(&[(1, 1), (2, 3), (3, 8), (6, 24)])),
            vec![6, 6]
        );
    }

    #[test]
    fn partitions() {
        let s = LatinSquare::circulant(5);
        assert_eq!(
            partition_group(&MagicPartition::from_latin(&s)).unwrap(),
            latin_group(&s).unwrap()
        );
        let full: Vec<usize> = (1..=4).collect();
        let diag = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| if i == j { full.clone() } else { vec![] })
                    .collect()
            })
            .collect();
        let g = partition_group(&MagicPartition::new(4, diag).unwrap()).unwrap();
        assert_eq!(g.order, 1);
        let bad = vec![vec![vec![1], vec![1]], vec![vec![2], vec![2]]];
        assert!(MagicPartition::new(2, bad).is_err());
    }

    #[test]
    fn group_cap() {
        let s = square(&["12345", "21453", "34512", "45231", "53124"]);
        assert!(matches!(
            latin_group_with_cap(&s, 3),
            Err(Error::GroupTooLarge { cap: 3 })
        ));
    }

    #[test]
    fn detect_on_fourier_and_latin_bases() {
        let xi = magic_from_hadamard(&fourier(5).into());
        let s = detect_latin(&xi).unwrap();
        assert_eq!(s, square(&["12345", "51234", "45123", "34512", "23451"]));
        let t = square(&["12345", "31254", "45132", "24513", "53421"]);
        assert_eq!(detect_latin(&latin_basis(&t)).unwrap(), t);
        assert!(detect_latin(&magic_from_hadamard(&named("T", &[]).unwrap())).is_none());
        let float = magic_from_hadamard(&fourier(4).to_complex().into());
        assert_eq!(
            detect_latin(&float),
            Some(square(&["1234", "4123", "3412", "2341"]))
        );
    }

    #[test]
    fn fourier_tensor_examples() {
        let f2: HadamardMatrix = fourier(2).into();
        assert_eq!(fourier_tensor_decompose(&fourier(6).into()), Some(vec![6]));
        assert_eq!(
            fourier_tensor_decompose(&tensor(&f2, &f2)),
            Some(vec![2, 2])
        );
        assert_eq!(fourier_tensor_decompose(&named("T", &[]).unwrap()), None);
    }
}
