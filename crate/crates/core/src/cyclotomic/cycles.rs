use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::ring::CyclotomicInt;
use crate::arith::prime_divisors;
use crate::error::{Error, Result};

/// A multiset of exponents `e`, standing for the formal sum of `zeta_l^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentMultiset {
    order: u32,
    exponents: Vec<u32>,
}

impl ExponentMultiset {
    pub fn new(order: u32, exponents: Vec<u32>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder(order));
        }
        if let Some(&e) = exponents.iter().find(|&&e| e >= order) {
            return Err(Error::ExponentOutOfRange { exponent: e, order });
        }
        Ok(Self { order, exponents })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    fn counts(&self) -> Vec<u32> {
        let mut c = vec![0u32; self.order as usize];
        for &e in &self.exponents {
            c[e as usize] += 1;
        }
        c
    }
}

/// The exact value of the formal sum.
pub fn sum_roots(s: &ExponentMultiset) -> CyclotomicInt {
    CyclotomicInt::from_exponents(s.order, s.exponents.iter().map(|&e| e as u64))
        .expect("order validated at construction")
}

/// A rotated `prime`-cycle: `{rotation + t * order / prime : 0 <= t < prime}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cycle {
    pub prime: u32,
    pub rotation: u32,
}

impl Cycle {
    pub fn exponents(&self, order: u32) -> impl Iterator<Item = u32> + '_ {
        let step = order / self.prime;
        (0..self.prime).map(move |t| self.rotation + t * step)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleDecomposition {
    pub order: u32,
    pub cycles: Vec<Cycle>,
}

impl CycleDecomposition {
    /// Cycle sizes in non-decreasing order, e.g. `[2, 2, 3]`.
    pub fn profile(&self) -> Vec<u32> {
        let mut p: Vec<u32> = self.cycles.iter().map(|c| c.prime).collect();
        p.sort_unstable();
        p
    }

    /// All exponents covered by the cycles, sorted.
    pub fn exponents(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .cycles
            .iter()
            .flat_map(|c| c.exponents(self.order))
            .collect();
        v.sort_unstable();
        v
    }
}

impl fmt::Display for CycleDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .cycles
            .iter()
            .map(|c| format!("{}-cycle@{}", c.prime, c.rotation))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Splits a vanishing sum into rotated prime cycles.
///
/// Returns `Ok(None)` when the sum vanishes but admits no decomposition, and
/// an error when it does not vanish at all. The search is exhaustive: the
/// smallest remaining exponent must lie in some cycle, and every prime
/// divisor of the order (largest first) is tried for it.
pub fn cycle_decompose(s: &ExponentMultiset) -> Result<Option<CycleDecomposition>> {
    let total = sum_roots(s);
    if !total.is_zero() {
        return Err(Error::NotVanishing {
            residual: total.to_complex().norm(),
        });
    }
    let order = s.order;
    let mut primes: Vec<u32> = prime_divisors(order as u64)
        .into_iter()
        .map(|p| p as u32)
        .collect();
    primes.reverse();
    let mut counts = s.counts();
    let mut failed = HashSet::new();
    let mut cycles = Vec::new();
    if search(order, &primes, &mut counts, &mut failed, &mut cycles) {
        Ok(Some(CycleDecomposition { order, cycles }))
    } else {
        Ok(None)
    }
}

fn search(
    order: u32,
    primes: &[u32],
    counts: &mut [u32],
    failed: &mut HashSet<Vec<u32>>,
    cycles: &mut Vec<Cycle>,
) -> bool {
    let Some(first) = counts.iter().position(|&c| c > 0) else {
        return true;
    };
    if failed.contains(counts) {
        return false;
    }
    for &p in primes {
        let step = (order / p) as usize;
        let rotation = first % step;
        let members = (0..p as usize).map(|t| rotation + t * step);
        if members.clone().any(|e| counts[e] == 0) {
            continue;
        }
        for e in members.clone() {
            counts[e] -= 1;
        }
        cycles.push(Cycle {
            prime: p,
            rotation: rotation as u32,
        });
        if search(order, primes, counts, failed, cycles) {
            return true;
        }
        cycles.pop();
        for e in members {
            counts[e] += 1;
        }
    }
    failed.insert(counts.to_vec());
    false
}

/// Whether `n` lies in the numerical semigroup generated by the distinct
/// prime factors of `l`.
pub fn lam_leung_member(n: u32, l: u32) -> bool {
    let primes = prime_divisors(l as u64);
    let n = n as usize;
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for k in 1..=n {
        reach[k] = primes
            .iter()
            .any(|&p| p as usize <= k && reach[k - p as usize]);
    }
    reach[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(order: u32, e: &[u32]) -> ExponentMultiset {
        ExponentMultiset::new(order, e.to_vec()).unwrap()
    }

    #[test]
    fn sum_roots_examples() {
        assert!(sum_roots(&ms(6, &[0, 3])).is_zero());
        assert!(sum_roots(&ms(30, &[5, 6, 12, 18, 24, 25])).is_zero());
        assert!(!sum_roots(&ms(6, &[0, 1])).is_zero());
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            ExponentMultiset::new(0, vec![]),
            Err(Error::InvalidOrder(0))
        ));
        assert!(matches!(
            ExponentMultiset::new(4, vec![4]),
            Err(Error::ExponentOutOfRange { .. })
        ));
        assert!(matches!(
            cycle_decompose(&ms(6, &[0, 1])),
            Err(Error::NotVanishing { .. })
        ));
    }

    #[test]
    fn opposite_pair_is_a_two_cycle() {
        let d = cycle_decompose(&ms(30, &[0, 15])).unwrap().unwrap();
        assert_eq!(
            d.cycles,
            vec![Cycle {
                prime: 2,
                rotation: 0
            }]
        );
    }

    #[test]
    fn two_full_triples() {
        let d = cycle_decompose(&ms(30, &[0, 10, 20, 5, 15, 25]))
            .unwrap()
            .unwrap();
        let mut c = d.cycles.clone();
        c.sort();
        assert_eq!(
            c,
            vec![
                Cycle {
                    prime: 3,
                    rotation: 0
                },
                Cycle {
                    prime: 3,
                    rotation: 5
                }
            ]
        );
    }

    #[test]
    fn three_prime_counterexample_does_not_decompose() {
        assert_eq!(
            cycle_decompose(&ms(30, &[5, 6, 12, 18, 24, 25])).unwrap(),
            None
        );
    }

    #[test]
    fn trivial_order_one() {
        assert!(cycle_decompose(&ms(1, &[]))
            .unwrap()
            .unwrap()
            .cycles
            .is_empty());
        assert!(cycle_decompose(&ms(1, &[0])).is_err());
    }

    #[test]
    fn lam_leung_examples() {
        assert!(!lam_leung_member(3, 2));
        assert!(lam_leung_member(5, 6));
        assert!(lam_leung_member(7, 7));
        assert!(!lam_leung_member(6, 7));
        assert!(lam_leung_member(10, 14));
        assert!(!lam_leung_member(10, 13));
    }
}
