//! Emptiness tests for Butson classes `H_n(l)` and the decision table.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, is_prime, power_factorization, prime_power};
use crate::cyclotomic::lam_leung_member;
use crate::error::{Error, Result};
use crate::hadamard::{fourier, level, named, tensor, ButsonMatrix, HadamardMatrix, Phase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Obstruction {
    LamLeung,
    Sylvester2,
    SylvesterExtA,
    SylvesterExtB,
    DeLauney,
    Haagerup5,
}

impl Obstruction {
    pub fn symbol(self) -> &'static str {
        match self {
            Obstruction::LamLeung => "o",
            Obstruction::Sylvester2 | Obstruction::SylvesterExtA | Obstruction::SylvesterExtB => {
                "o_s"
            }
            Obstruction::DeLauney => "o_l",
            Obstruction::Haagerup5 => "o_h",
        }
    }

    /// Human-readable name of the criterion.
    pub fn name(self) -> &'static str {
        match self {
            Obstruction::LamLeung => "Lam-Leung",
            Obstruction::Sylvester2 => "Sylvester",
            Obstruction::SylvesterExtA | Obstruction::SylvesterExtB => "Sylvester, extended",
            Obstruction::DeLauney => "de Launey",
            Obstruction::Haagerup5 => "Haagerup",
        }
    }
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Applies {
    Fires,
    Passes,
    Inconclusive,
}

impl From<bool> for Applies {
    fn from(b: bool) -> Self {
        if b {
            Applies::Fires
        } else {
            Applies::Passes
        }
    }
}

/// Real Hadamard matrices need `n = 2` or `4 | n`.
pub fn sylvester2(n: u32) -> bool {
    n != 2 && !n.is_multiple_of(4)
}

/// `n - 2 = p` an odd prime with `l = 2 p^b`.
pub fn sylvester_ext_a(n: u32, l: u32) -> bool {
    let p = n.wrapping_sub(2);
    n > 2
        && p > 2
        && is_prime(p as u64)
        && l.is_multiple_of(2)
        && prime_power((l / 2) as u64).is_some_and(|(q, _)| q == p as u64)
}

/// `n = 2q`, `q` an odd prime, with `l = p^b` or `l = 2 p^b` for a prime
/// `p > q`. Higher powers of 2 are excluded: `H` at `q = 1` lies in
/// `H_6(4)`, hence in `H_6(20)`.
pub fn sylvester_ext_b(n: u32, l: u32) -> bool {
    if !n.is_multiple_of(2) {
        return false;
    }
    let q = (n / 2) as u64;
    if q < 3 || !is_prime(q) {
        return false;
    }
    match factorize(l as u64).as_slice() {
        [(2, 1), (p, _)] | [(p, _)] => *p > q,
        _ => false,
    }
}

pub fn sylvester_ext(n: u32, l: u32) -> bool {
    sylvester_ext_a(n, l) || sylvester_ext_b(n, l)
}

/// Whether `n^n` is a norm from `Z[exp(2 pi i / l)]`, decided for
/// `l` in `{1, 2, 3, 4, 6}` only.
pub fn de_launey(n: u32, l: u32) -> Applies {
    let bad_residue: fn(u64) -> bool = match l {
        1 | 2 => |_| true,
        4 => |p| p % 4 == 3,
        3 | 6 => |p| p % 3 == 2,
        _ => return Applies::Inconclusive,
    };
    power_factorization(n as u64, n)
        .into_iter()
        .any(|(p, m)| bad_residue(p) && m % 2 == 1)
        .into()
}

pub fn haagerup5(n: u32, l: u32) -> bool {
    n == 5 && !l.is_multiple_of(5)
}

/// The first obstruction that fires, in the order Lam-Leung, Sylvester at
/// level 2, de Launey, Haagerup, extended Sylvester.
pub fn first_obstruction(n: u32, l: u32) -> Option<Obstruction> {
    if !lam_leung_member(n, l) {
        return Some(Obstruction::LamLeung);
    }
    if l == 2 && sylvester2(n) {
        return Some(Obstruction::Sylvester2);
    }
    if de_launey(n, l) == Applies::Fires {
        return Some(Obstruction::DeLauney);
    }
    if haagerup5(n, l) {
        return Some(Obstruction::Haagerup5);
    }
    if sylvester_ext_a(n, l) {
        return Some(Obstruction::SylvesterExtA);
    }
    if sylvester_ext_b(n, l) {
        return Some(Obstruction::SylvesterExtB);
    }
    None
}

/// A registry member or a tensor product of registry members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub name: String,
    pub n: usize,
    pub level: u32,
    #[serde(skip)]
    factors: Vec<usize>,
}

struct Base {
    name: String,
    fourier: bool,
    matrix: ButsonMatrix,
}

/// Butson registry members and their tensor products up to a size bound.
pub struct WitnessRegistry {
    base: Vec<Base>,
    by_size: BTreeMap<usize, Vec<Witness>>,
}

impl WitnessRegistry {
    pub fn new(n_max: usize) -> Self {
        let mut base: Vec<Base> = (2..=n_max)
            .map(|k| Base {
                name: format!("F_{k}"),
                fourier: true,
                matrix: fourier(k),
            })
            .collect();
        let q1 = [Phase::ONE];
        for (name, params) in [
            ("T", &[][..]),
            ("H", &q1[..]),
            ("P", &q1[..]),
            ("X_9^10", &[][..]),
            ("X_10^4", &[][..]),
            ("X_10^5", &[][..]),
            ("X_10^6", &[][..]),
        ] {
            let m = named(name, params).expect("registry entry");
            if m.n() <= n_max {
                let HadamardMatrix::Butson(b) = m else {
                    unreachable!("registry witnesses are Butson")
                };
                base.push(Base {
                    name: name.to_string(),
                    fourier: false,
                    matrix: b,
                });
            }
        }
        let mut reg = WitnessRegistry {
            base,
            by_size: BTreeMap::new(),
        };
        let mut stack = Vec::new();
        reg.extend(0, 1, n_max, &mut stack);
        for list in reg.by_size.values_mut() {
            list.sort_by(|a, b| {
                (a.level, a.factors.len(), &a.factors).cmp(&(b.level, b.factors.len(), &b.factors))
            });
        }
        reg
    }

    fn extend(&mut self, from: usize, size: usize, n_max: usize, stack: &mut Vec<usize>) {
        if !stack.is_empty() {
            let w = self.describe(stack, size);
            self.by_size.entry(size).or_default().push(w);
        }
        for k in from..self.base.len() {
            let s = size * self.base[k].matrix.n();
            if s <= n_max {
                stack.push(k);
                self.extend(k, s, n_max, stack);
                stack.pop();
            }
        }
    }

    fn describe(&self, factors: &[usize], n: usize) -> Witness {
        let parts: Vec<&Base> = factors.iter().map(|&k| &self.base[k]).collect();
        let level = parts
            .iter()
            .fold(1, |l, b| crate::arith::lcm32(l, level(&b.matrix)));
        let name = if parts.len() > 1 && parts.iter().all(|b| b.fourier && b.matrix.n() < 10) {
            let digits: String = parts.iter().map(|b| b.matrix.n().to_string()).collect();
            format!("F_{digits}")
        } else {
            parts
                .iter()
                .map(|b| b.name.as_str())
                .collect::<Vec<_>>()
                .join("⊗")
        };
        Witness {
            name,
            n,
            level,
            factors: factors.to_vec(),
        }
    }

    /// The preferred witness in `H_n(l)`: smallest level, then fewest
    /// factors, then registry order.
    pub fn best(&self, n: usize, l: u32) -> Option<&Witness> {
        if n == 1 {
            return None;
        }
        self.by_size
            .get(&n)?
            .iter()
            .find(|w| l.is_multiple_of(w.level))
    }

    pub fn witnesses(&self, n: usize) -> &[Witness] {
        self.by_size.get(&n).map_or(&[], Vec::as_slice)
    }

    pub fn matrix(&self, w: &Witness) -> HadamardMatrix {
        w.factors
            .iter()
            .map(|&k| HadamardMatrix::from(self.base[k].matrix.clone()))
            .reduce(|a, b| tensor(&a, &b))
            .expect("witness has a factor")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Empty { obstruction: Obstruction },
    Exists { witness: String },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionVerdict {
    pub n: u32,
    pub l: u32,
    #[serde(flatten)]
    pub status: Status,
}

impl ObstructionVerdict {
    pub fn symbol(&self) -> &str {
        match &self.status {
            Status::Empty { obstruction } => obstruction.symbol(),
            Status::Exists { witness } => witness,
            Status::Inconclusive => "?",
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.status, Status::Empty { .. })
    }

    pub fn exists(&self) -> bool {
        matches!(self.status, Status::Exists { .. })
    }
}

pub fn decide(n: u32, l: u32) -> Result<ObstructionVerdict> {
    decide_with(&WitnessRegistry::new(n as usize), n, l)
}

/// Registry witness first, then the obstructions. A cell where both a
/// witness and an obstruction apply is reported as an error.
pub fn decide_with(reg: &WitnessRegistry, n: u32, l: u32) -> Result<ObstructionVerdict> {
    if n == 0 || l == 0 {
        return Err(Error::InvalidValue(format!("cell ({n},{l})")));
    }
    let verdict = |status| ObstructionVerdict { n, l, status };
    if n == 1 {
        return Ok(verdict(Status::Exists {
            witness: "F_1".into(),
        }));
    }
    let witness = reg.best(n as usize, l);
    let obstruction = first_obstruction(n, l);
    match (witness, obstruction) {
        (Some(w), Some(o)) => Err(Error::InconsistentVerdict {
            n,
            l,
            witness: w.name.clone(),
            obstruction: o.to_string(),
        }),
        (Some(w), None) => Ok(verdict(Status::Exists {
            witness: w.name.clone(),
        })),
        (None, Some(o)) => Ok(verdict(Status::Empty { obstruction: o })),
        (None, None) => Ok(verdict(Status::Inconclusive)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table {
    pub n_max: u32,
    pub l_max: u32,
    /// Rows `n = 2..=n_max`, columns `l = 2..=l_max`.
    pub rows: Vec<Vec<ObstructionVerdict>>,
}

impl Table {
    pub fn cell(&self, n: u32, l: u32) -> &ObstructionVerdict {
        &self.rows[(n - 2) as usize][(l - 2) as usize]
    }

    pub fn cells(&self) -> impl Iterator<Item = &ObstructionVerdict> {
        self.rows.iter().flatten()
    }

    pub fn render(&self) -> String {
        let width = self
            .cells()
            .map(|c| c.symbol().chars().count())
            .chain([self.l_max.to_string().len(), 3])
            .max()
            .unwrap_or(3);
        let mut out = format!("{:<4}", "n\\l");
        for l in 2..=self.l_max {
            out.push_str(&format!(" {:>width$}", l));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:<4}", row[0].n));
            for c in row {
                let s = c.symbol();
                let pad = width - s.chars().count();
                out.push(' ');
                out.push_str(&" ".repeat(pad));
                out.push_str(s);
            }
            out.push('\n');
        }
        out
    }
}

/// Decides every cell with `2 <= n <= n_max`, `2 <= l <= l_max`, in parallel.
pub fn table(n_max: u32, l_max: u32) -> Result<Table> {
    if n_max < 2 || l_max < 2 {
        return Err(Error::InvalidValue(format!(
            "table bounds ({n_max},{l_max}) must be at least 2"
        )));
    }
    let reg = WitnessRegistry::new(n_max as usize);
    let rows = (2..=n_max)
        .into_par_iter()
        .map(|n| (2..=l_max).map(|l| decide_with(&reg, n, l)).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    Ok(Table { n_max, l_max, rows })
}
