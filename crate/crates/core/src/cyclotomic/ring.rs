use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::arith::{divisors, gcd, lcm};
use crate::error::{Error, Result};

/// Coefficients (constant term first) of the monic cyclotomic polynomial of
/// order `l`. Results are cached process-wide.
pub fn cyclotomic_polynomial(l: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().unwrap().get(&l) {
        return p.clone();
    }
    assert!(l > 0, "cyclotomic polynomial of order 0");
    // x^l - 1 divided by every Phi_d with d a proper divisor of l.
    let mut num = vec![0i64; l as usize + 1];
    num[0] = -1;
    num[l as usize] = 1;
    for d in divisors(l as u64) {
        if d == l as u64 {
            continue;
        }
        let phi_d = cyclotomic_polynomial(d as u32);
        num = exact_monic_division(&num, &phi_d);
    }
    let poly = Arc::new(num);
    cache.lock().unwrap().insert(l, poly.clone());
    poly
}

fn exact_monic_division(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dn;
    let mut quot = vec![0i64; qlen];
    for k in (0..qlen).rev() {
        let c = rem[k + dn];
        quot[k] = c;
        if c != 0 {
            for (i, &d) in den.iter().enumerate() {
                rem[k + i] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    quot
}

/// Reduces a coefficient vector (constant term first, any length) modulo the
/// cyclotomic polynomial of order `l`, returning exactly `phi(l)` coefficients.
pub(crate) fn reduce_mod_cyclotomic(l: u32, raw: &[i64]) -> Vec<i64> {
    let l_us = l as usize;
    // x^l = 1 first, so the long division below is short.
    let mut folded = vec![0i64; l_us];
    for (k, &c) in raw.iter().enumerate() {
        folded[k % l_us] += c;
    }
    let phi = cyclotomic_polynomial(l);
    let deg = phi.len() - 1;
    for top in (deg..l_us).rev() {
        let c = folded[top];
        if c != 0 {
            for (i, &p) in phi.iter().enumerate() {
                folded[top - deg + i] -= c * p;
            }
        }
    }
    folded.truncate(deg);
    folded
}

/// Exact element of the ring of integers of the `order`-th cyclotomic field.
///
/// The coefficient vector holds `phi(order)` entries: the remainder of the
/// defining polynomial modulo the cyclotomic polynomial, so two elements of
/// the same order are equal exactly when their vectors are.
#[derive(Clone, Debug)]
pub struct CyclotomicInt {
    order: u32,
    coeffs: Vec<i64>,
}

impl CyclotomicInt {
    pub fn zero(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder(order));
        }
        let deg = cyclotomic_polynomial(order).len() - 1;
        Ok(Self {
            order,
            coeffs: vec![0; deg],
        })
    }

    pub fn from_integer(order: u32, value: i64) -> Result<Self> {
        let mut z = Self::zero(order)?;
        z.coeffs[0] = value;
        Ok(z)
    }

    pub fn one(order: u32) -> Result<Self> {
        Self::from_integer(order, 1)
    }

    /// The root of unity `zeta^k`; `k` is taken modulo `order`.
    pub fn root(order: u32, k: u64) -> Result<Self> {
        Self::from_exponents(order, [k])
    }

    /// `sum_k zeta^{e_k}` over the given exponents (taken modulo `order`).
    pub fn from_exponents(order: u32, exps: impl IntoIterator<Item = u64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder(order));
        }
        let mut raw = vec![0i64; order as usize];
        for e in exps {
            raw[(e % order as u64) as usize] += 1;
        }
        Ok(Self::from_raw(order, &raw))
    }

    /// Builds an element from an arbitrary-length coefficient vector in
    /// powers of `zeta`.
    pub fn from_raw(order: u32, raw: &[i64]) -> Self {
        assert!(order > 0);
        Self {
            order,
            coeffs: reduce_mod_cyclotomic(order, raw),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Canonical coefficients in the power basis `1, zeta, ..., zeta^{phi-1}`.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Rational integer value, if the element lies in `Z`.
    pub fn as_integer(&self) -> Option<i64> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    /// Re-expresses the element inside the cyclotomic ring of a multiple of
    /// its order.
    pub fn lift(&self, order: u32) -> Self {
        assert!(
            order.is_multiple_of(self.order),
            "cannot lift order {} to {}",
            self.order,
            order
        );
        if order == self.order {
            return self.clone();
        }
        let step = (order / self.order) as usize;
        let mut raw = vec![0i64; order as usize];
        for (k, &c) in self.coeffs.iter().enumerate() {
            raw[k * step] += c;
        }
        Self::from_raw(order, &raw)
    }

    /// Complex conjugation, `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> Self {
        self.galois(self.order as u64 - 1)
    }

    /// The Galois automorphism `zeta -> zeta^k` (`k` coprime to the order).
    pub fn galois(&self, k: u64) -> Self {
        let l = self.order as u64;
        debug_assert!(l == 1 || gcd(k % l, l) == 1);
        let mut raw = vec![0i64; self.order as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            raw[((i as u64 * k) % l) as usize] += c;
        }
        Self::from_raw(self.order, &raw)
    }

    pub fn to_complex(&self) -> Complex64 {
        let l = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| Complex64::from_polar(c as f64, TAU * k as f64 / l))
            .sum()
    }

    /// Brings two elements to a common order.
    pub fn align(a: &Self, b: &Self) -> (Self, Self) {
        if a.order == b.order {
            return (a.clone(), b.clone());
        }
        let l = lcm(a.order as u64, b.order as u64) as u32;
        (a.lift(l), b.lift(l))
    }

    fn binary(&self, rhs: &Self, op: impl Fn(i64, i64) -> i64) -> Self {
        if self.order != rhs.order {
            let (a, b) = Self::align(self, rhs);
            return a.binary(&b, op);
        }
        Self {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    fn product(&self, rhs: &Self) -> Self {
        if self.order != rhs.order {
            let (a, b) = Self::align(self, rhs);
            return a.product(&b);
        }
        let mut raw = vec![0i64; self.coeffs.len() + rhs.coeffs.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                raw[i + j] += a * b;
            }
        }
        Self::from_raw(self.order, &raw)
    }

    pub fn scale(&self, k: i64) -> Self {
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|&c| c * k).collect(),
        }
    }
}

impl PartialEq for CyclotomicInt {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            self.coeffs == other.coeffs
        } else {
            let (a, b) = Self::align(self, other);
            a.coeffs == b.coeffs
        }
    }
}

impl Eq for CyclotomicInt {}

impl Add for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn add(self, rhs: &CyclotomicInt) -> CyclotomicInt {
        self.binary(rhs, |a, b| a + b)
    }
}

impl Sub for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn sub(self, rhs: &CyclotomicInt) -> CyclotomicInt {
        self.binary(rhs, |a, b| a - b)
    }
}

impl Mul for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn mul(self, rhs: &CyclotomicInt) -> CyclotomicInt {
        self.product(rhs)
    }
}

impl Neg for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn neg(self) -> CyclotomicInt {
        self.scale(-1)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CyclotomicInt {
            type Output = CyclotomicInt;
            fn $m(self, rhs: CyclotomicInt) -> CyclotomicInt {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0 { '-' } else { '+' })?;
            } else if c < 0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ if a == 1 => write!(f, "z{}^{k}", self.order)?,
                _ => write!(f, "{a}*z{}^{k}", self.order)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(*cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(*cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        // Phi_30 has degree phi(30) = 8.
        assert_eq!(cyclotomic_polynomial(30).len(), 9);
    }

    #[test]
    fn roots_multiply_by_adding_exponents() {
        for l in 1..16u32 {
            for a in 0..l as u64 {
                for b in 0..l as u64 {
                    let lhs =
                        &CyclotomicInt::root(l, a).unwrap() * &CyclotomicInt::root(l, b).unwrap();
                    assert_eq!(lhs, CyclotomicInt::root(l, a + b).unwrap());
                }
            }
        }
    }

    #[test]
    fn full_root_set_vanishes() {
        for l in 2..20u32 {
            let s = CyclotomicInt::from_exponents(l, 0..l as u64).unwrap();
            assert!(s.is_zero(), "order {l}");
        }
    }

    #[test]
    fn conjugation_and_lifting_agree_with_floats() {
        let z = CyclotomicInt::from_exponents(12, [1, 5, 5, 7]).unwrap();
        let c = z.conj().to_complex();
        assert!((c - z.to_complex().conj()).norm() < 1e-12);
        let lifted = z.lift(36);
        assert!((lifted.to_complex() - z.to_complex()).norm() < 1e-12);
        assert_eq!(lifted, z);
    }

    #[test]
    fn norms_of_small_sums() {
        let a = CyclotomicInt::from_exponents(6, [0, 1]).unwrap();
        assert!(!a.is_zero());
        assert_eq!((&a * &a.conj()).as_integer(), Some(3));
        let b = CyclotomicInt::from_exponents(6, [0, 2]).unwrap();
        assert_eq!((&b * &b.conj()).as_integer(), Some(1));
    }

    #[test]
    fn zero_order_is_rejected() {
        assert!(matches!(
            CyclotomicInt::zero(0),
            Err(Error::InvalidOrder(0))
        ));
    }
}
