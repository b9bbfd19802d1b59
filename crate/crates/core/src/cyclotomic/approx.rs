use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::is_prime;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

/// One block of an approximate decomposition: `members` (indices into the
/// input) are `x * mu_p` where `x = exp(i * rotation)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxCycle {
    pub prime: u32,
    /// Angle in `[0, 2*pi/prime)`.
    pub rotation: f64,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxDecomposition {
    pub cycles: Vec<ApproxCycle>,
}

impl ApproxDecomposition {
    pub fn profile(&self) -> Vec<u32> {
        let mut p: Vec<u32> = self.cycles.iter().map(|c| c.prime).collect();
        p.sort_unstable();
        p
    }
}

/// Partitions unit-modulus values into rotated full sets of `p`-th roots of
/// unity, `p` prime. Returns `Ok(None)` if the values vanish but do not split.
pub fn cycle_decompose_approx(
    values: &[Complex64],
    tol: f64,
) -> Result<Option<ApproxDecomposition>> {
    let primes: Vec<u32> = (2..=values.len() as u32)
        .rev()
        .filter(|&p| is_prime(p as u64))
        .collect();
    cycle_decompose_approx_with(values, tol, &primes)
}

/// As [`cycle_decompose_approx`], restricted to blocks whose sizes lie in
/// `primes` (tried in the given order).
pub fn cycle_decompose_approx_with(
    values: &[Complex64],
    tol: f64,
    primes: &[u32],
) -> Result<Option<ApproxDecomposition>> {
    for (index, v) in values.iter().enumerate() {
        let modulus = v.norm();
        if (modulus - 1.0).abs() > tol {
            return Err(Error::NotUnimodular { index, modulus });
        }
    }
    let residual = values.iter().sum::<Complex64>().norm();
    if residual > values.len().max(1) as f64 * tol {
        return Err(Error::NotVanishing { residual });
    }
    let mut used = vec![false; values.len()];
    let mut cycles = Vec::new();
    if search(values, tol, primes, &mut used, &mut cycles) {
        Ok(Some(ApproxDecomposition { cycles }))
    } else {
        Ok(None)
    }
}

fn search(
    values: &[Complex64],
    tol: f64,
    primes: &[u32],
    used: &mut [bool],
    cycles: &mut Vec<ApproxCycle>,
) -> bool {
    let Some(first) = used.iter().position(|&u| !u) else {
        return true;
    };
    let remaining = used.iter().filter(|&&u| !u).count();
    let x = values[first];
    for &p in primes {
        if p as usize > remaining {
            continue;
        }
        used[first] = true;
        let mut members = vec![first];
        for t in 1..p {
            let target = x * Complex64::from_polar(1.0, TAU * t as f64 / p as f64);
            let hit = (0..values.len()).find(|&k| !used[k] && (values[k] - target).norm() <= tol);
            match hit {
                Some(k) => {
                    used[k] = true;
                    members.push(k);
                }
                None => break,
            }
        }
        if members.len() == p as usize {
            let step = TAU / p as f64;
            let rotation = x.arg().rem_euclid(step);
            let rotation = if step - rotation < 1e-12 {
                0.0
            } else {
                rotation
            };
            cycles.push(ApproxCycle {
                prime: p,
                rotation,
                members: members.clone(),
            });
            if search(values, tol, primes, used, cycles) {
                return true;
            }
            cycles.pop();
        }
        for k in members {
            used[k] = false;
        }
    }
    false
}
