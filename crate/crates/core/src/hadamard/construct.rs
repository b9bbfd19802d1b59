use super::matrix::{ButsonMatrix, ComplexHadamard, HadamardMatrix, Phase};
use crate::arith::lcm32;
use crate::error::{Error, Result};

/// The Fourier matrix `F_n`, entries `w^{ij}` with `w = exp(2*pi*i/n)`.
pub fn fourier(n: usize) -> ButsonMatrix {
    assert!(n >= 1, "Fourier matrix of size 0");
    let exps = (0..n * n).map(|k| ((k / n) * (k % n) % n) as u32).collect();
    ButsonMatrix::new(n, n as u32, exps).expect("valid Fourier exponents")
}

/// Builds an `N x N` matrix from a cell function returning phases.
fn assemble(n: usize, tol: f64, cell: impl Fn(usize, usize) -> Vec<Phase>) -> HadamardMatrix {
    let mut phases = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            phases.push(cell(r, c).into_iter().fold(Phase::ONE, Phase::mul));
        }
    }
    let exact = phases.iter().try_fold(1u32, |l, p| match p {
        Phase::Root { den, .. } => Some(lcm32(l, *den)),
        Phase::Unit(_) => None,
    });
    match exact {
        Some(l) => {
            let exps = phases.iter().map(|p| p.exponent_at(l).unwrap()).collect();
            ButsonMatrix::new(n, l, exps).unwrap().into()
        }
        None => {
            let entries = phases.iter().map(|p| p.to_complex()).collect();
            ComplexHadamard::new(n, entries, tol).unwrap().into()
        }
    }
}

fn level_of(m: &HadamardMatrix) -> u32 {
    m.as_butson().map_or(1, |b| b.level_bound())
}

/// Keeps the level of an all-Butson product at the lcm of the factor levels
/// rather than the (possibly smaller) level of the entries that occur.
fn with_level(m: HadamardMatrix, l: u32) -> HadamardMatrix {
    match m {
        HadamardMatrix::Butson(b) if l.is_multiple_of(b.level_bound()) => b.at_level(l).into(),
        other => other,
    }
}

fn combined_tol(ms: &[&HadamardMatrix]) -> f64 {
    ms.iter().map(|m| m.tol()).fold(0.0, f64::max)
}

/// `(h (x) k)_{(i,a),(j,b)} = h_ij k_ab`, outer index major.
pub fn tensor(h: &HadamardMatrix, k: &HadamardMatrix) -> HadamardMatrix {
    let (n, m) = (h.n(), k.n());
    let out = assemble(n * m, combined_tol(&[h, k]), |r, c| {
        vec![h.entry_phase(r / m, c / m), k.entry_phase(r % m, c % m)]
    });
    if h.is_butson() && k.is_butson() {
        with_level(out, lcm32(level_of(h), level_of(k)))
    } else {
        out
    }
}

/// `(h_ij k^j_ab)_{(i,a),(j,b)}`: block column `j` uses the factor `ks[j]`.
pub fn dita_product(h: &HadamardMatrix, ks: &[HadamardMatrix]) -> Result<HadamardMatrix> {
    let n = h.n();
    if ks.len() != n {
        return Err(Error::Shape(format!(
            "{} inner factors for an outer matrix of size {n}",
            ks.len()
        )));
    }
    let m = ks[0].n();
    if let Some(k) = ks.iter().find(|k| k.n() != m) {
        return Err(Error::SizeMismatch {
            left: m,
            right: k.n(),
        });
    }
    let mut all: Vec<&HadamardMatrix> = ks.iter().collect();
    all.push(h);
    let out = assemble(n * m, combined_tol(&all), |r, c| {
        let (i, a, j, b) = (r / m, r % m, c / m, c % m);
        vec![h.entry_phase(i, j), ks[j].entry_phase(a, b)]
    });
    if all.iter().all(|x| x.is_butson()) {
        let l = all.iter().fold(1, |l, x| lcm32(l, level_of(x)));
        Ok(with_level(out, l))
    } else {
        Ok(out)
    }
}

/// The deformed tensor product `(h_ij L_aj k_ab)_{(i,a),(j,b)}` with an
/// `m x n` parameter matrix `L`.
pub fn dita_deform(
    h: &HadamardMatrix,
    k: &HadamardMatrix,
    l: &[Vec<Phase>],
) -> Result<HadamardMatrix> {
    let (n, m) = (h.n(), k.n());
    if l.len() != m || l.iter().any(|row| row.len() != n) {
        return Err(Error::Shape(format!("parameter matrix must be {m}x{n}")));
    }
    for p in l.iter().flatten() {
        if let Phase::Unit(z) = p {
            Phase::unit(*z)?;
        }
    }
    let out = assemble(n * m, combined_tol(&[h, k]), |r, c| {
        let (i, a, j, b) = (r / m, r % m, c / m, c % m);
        vec![h.entry_phase(i, j), l[a][j], k.entry_phase(a, b)]
    });
    if h.is_butson() && k.is_butson() {
        Ok(with_level(out, lcm32(level_of(h), level_of(k))))
    } else {
        Ok(out)
    }
}
