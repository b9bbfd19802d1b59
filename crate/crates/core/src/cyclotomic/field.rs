//! Elements of the cyclotomic field `Q(zeta_l)` with exact rational
//! coefficients. Used by the exact nullspace computation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ring::{cyclotomic_polynomial, CyclotomicInt};
use crate::arith::gcd;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicRational {
    order: u32,
    coeffs: Vec<BigRational>,
}

impl CyclotomicRational {
    pub fn zero(order: u32) -> Self {
        let deg = cyclotomic_polynomial(order).len() - 1;
        Self {
            order,
            coeffs: vec![BigRational::zero(); deg],
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn from_int(z: &CyclotomicInt) -> Self {
        Self {
            order: z.order(),
            coeffs: z
                .coeffs()
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn reduce(order: u32, mut raw: Vec<BigRational>) -> Vec<BigRational> {
        let l = order as usize;
        if raw.len() > l {
            let mut folded = vec![BigRational::zero(); l];
            for (k, c) in raw.into_iter().enumerate() {
                folded[k % l] += c;
            }
            raw = folded;
        }
        let phi = cyclotomic_polynomial(order);
        let deg = phi.len() - 1;
        for top in (deg..raw.len()).rev() {
            if raw[top].is_zero() {
                continue;
            }
            let c = raw[top].clone();
            for (i, &p) in phi.iter().enumerate() {
                if p != 0 {
                    raw[top - deg + i] -= &c * BigRational::from_integer(BigInt::from(p));
                }
            }
        }
        raw.resize(deg, BigRational::zero());
        raw
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.order, rhs.order);
        let mut raw = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        Self {
            order: self.order,
            coeffs: Self::reduce(self.order, raw),
        }
    }

    /// `self - k * rhs`, in place.
    pub fn sub_mul_assign(&mut self, k: &Self, rhs: &Self) {
        let prod = k.mul(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(prod.coeffs) {
            *a -= b;
        }
    }

    fn galois(&self, k: u64) -> Self {
        let l = self.order as u64;
        let mut raw = vec![BigRational::zero(); self.order as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            raw[((i as u64 * k) % l) as usize] += c;
        }
        Self {
            order: self.order,
            coeffs: Self::reduce(self.order, raw),
        }
    }

    /// Multiplicative inverse: the product of the non-trivial Galois
    /// conjugates divided by the (rational) field norm.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let l = self.order as u64;
        let mut adj = {
            let mut one = Self::zero(self.order);
            one.coeffs[0] = BigRational::one();
            one
        };
        for k in 2..l.max(2) {
            if gcd(k, l) == 1 {
                adj = adj.mul(&self.galois(k));
            }
        }
        let norm = self.mul(&adj);
        debug_assert!(norm.coeffs[1..].iter().all(Zero::is_zero));
        let n = norm.coeffs[0].clone();
        for c in adj.coeffs.iter_mut() {
            *c = &*c / &n;
        }
        Some(adj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trips() {
        for l in [3u32, 4, 5, 6, 8, 12] {
            for exps in [vec![0u64, 1], vec![0, 1, 1], vec![2, 3, 3, 0]] {
                let z = CyclotomicInt::from_exponents(l, exps).unwrap();
                if z.is_zero() {
                    continue;
                }
                let q = CyclotomicRational::from_int(&z);
                let inv = q.inv().unwrap();
                let prod = q.mul(&inv);
                assert!(prod.coeffs[0].is_one(), "order {l}");
                assert!(prod.coeffs[1..].iter().all(Zero::is_zero));
            }
        }
        assert!(CyclotomicRational::zero(5).inv().is_none());
    }
}
