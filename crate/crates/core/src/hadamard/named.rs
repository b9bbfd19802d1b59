//! The registry of named matrices and parametric families.
//!
//! Families are stored as small templates. Each cell is a root-of-unity
//! coefficient times at most one (possibly conjugated) parameter; the
//! n = 6 classifier reuses the same templates to recover parameters.

use std::sync::OnceLock;

use num_complex::Complex64;

use super::construct::fourier;
use super::matrix::{ButsonMatrix, ComplexHadamard, HadamardMatrix, Phase, DEFAULT_TOL};
use crate::arith::lcm32;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub coef: Phase,
    /// Parameter index and whether it enters conjugated.
    pub param: Option<(usize, bool)>,
}

impl Cell {
    pub fn value(&self, params: &[Phase]) -> Phase {
        match self.param {
            None => self.coef,
            Some((k, false)) => self.coef.mul(params[k]),
            Some((k, true)) => self.coef.mul(params[k].conj()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Template {
    pub name: &'static str,
    pub n: usize,
    pub params: Vec<char>,
    pub cells: Vec<Cell>,
}

impl Template {
    fn parse(name: &'static str, params: &str, text: &str) -> Template {
        let params: Vec<char> = params.chars().collect();
        let rows: Vec<Vec<Cell>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|t| parse_cell(t, &params))
                    .collect()
            })
            .collect();
        let n = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == n),
            "template {name} is not square"
        );
        Template {
            name,
            n,
            params,
            cells: rows.concat(),
        }
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.n + j]
    }

    pub fn instantiate(&self, params: &[Phase]) -> Result<HadamardMatrix> {
        if params.len() != self.params.len() {
            return Err(Error::MissingParameter {
                name: self.name.to_string(),
                expected: self.params.len(),
                got: params.len(),
            });
        }
        for p in params {
            if let Phase::Unit(z) = p {
                Phase::unit(*z)?;
            }
        }
        let phases: Vec<Phase> = self.cells.iter().map(|c| c.value(params)).collect();
        let exact = phases.iter().try_fold(1u32, |l, p| match p {
            Phase::Root { den, .. } => Some(lcm32(l, *den)),
            Phase::Unit(_) => None,
        });
        Ok(match exact {
            Some(l) => {
                let exps = phases.iter().map(|p| p.exponent_at(l).unwrap()).collect();
                ButsonMatrix::new(self.n, l, exps)?.into()
            }
            None => {
                let entries = phases.iter().map(|p| p.to_complex()).collect();
                ComplexHadamard::new(self.n, entries, DEFAULT_TOL)?.into()
            }
        })
    }
}

/// Token grammar: `[-](1 | coef | coef? param[*])`, with `coef` one of
/// `i`, `j`, `jj`, `w<k>` (a sixth root) and `param` a declared letter.
fn parse_cell(tok: &str, params: &[char]) -> Cell {
    let (neg, rest) = match tok.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, tok),
    };
    let sign = if neg { Phase::root(1, 2) } else { Phase::ONE };
    if rest == "1" {
        return Cell {
            coef: sign,
            param: None,
        };
    }
    let (coef, rest) = if let Some(r) = rest.strip_prefix("jj") {
        (Phase::root(2, 3), r)
    } else if let Some(r) = rest.strip_prefix('j') {
        (Phase::root(1, 3), r)
    } else if let Some(r) = rest.strip_prefix('i') {
        (Phase::root(1, 4), r)
    } else if let Some(r) = rest.strip_prefix('w') {
        let k = r[..1].parse::<i64>().expect("sixth-root exponent");
        (Phase::root(k, 6), &r[1..])
    } else {
        (Phase::ONE, rest)
    };
    let param = match rest.chars().next() {
        None => None,
        Some(c) => {
            let k = params
                .iter()
                .position(|&p| p == c)
                .unwrap_or_else(|| panic!("undeclared parameter in {tok}"));
            Some((k, &rest[1..] == "*"))
        }
    };
    Cell {
        coef: sign.mul(coef),
        param,
    }
}

const TAO: &str = "
1  1  1  1  1  1
1  1  j  j  jj jj
1  j  1  jj jj j
1  j  jj 1  j  jj
1  jj jj j  1  j
1  jj j  jj j  1";

const HAAGERUP: &str = "
1  1   1   1   1   1
1  -1  i   i   -i  -i
1  i   -1  -i  q   -q
1  i   -i  -1  -q  q
1  -i  q*  -q* i   -1
1  -i  -q* q*  -1  i";

const F22: &str = "
1 1  1  1
1 q  -1 -q
1 -1 1  -1
1 -q -1 q";

const F23: &str = "
1 1  1  1   1    1
1 j  jj r   jr   jjr
1 jj j  s   jjs  js
1 1  1  -1  -1   -1
1 j  jj -r  -jr  -jjr
1 jj j  -s  -jjs -js";

const F32: &str = "
1 1  1   1    1   1
1 -1 r   -r   s   -s
1 1  j   j    jj  jj
1 -1 jr  -jr  jjs -jjs
1 1  jj  jj   j   j
1 -1 jjr -jjr js  -js";

const PETRESCU: &str = "
1 1   1   1    1    1  1
1 w1q w4q w5   w3   w3 w1
1 w4q w1q w3   w5   w3 w1
1 w5  w3  w1q* w4q* w1 w3
1 w3  w5  w4q* w1q* w1 w3
1 w3  w3  w1   w1   w4 w5
1 w1  w1  w3   w3   w5 w4";

/// Circulant with first row `1, ia, -a, -i, -a*, ia*`.
fn bjorck_froberg_text() -> String {
    let first = ["1", "ia", "-a", "-i", "-a*", "ia*"];
    (0..6)
        .map(|k| {
            (0..6)
                .map(|j| first[(j + 6 - k) % 6])
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn templates() -> &'static [Template] {
    static CELL: OnceLock<Vec<Template>> = OnceLock::new();
    CELL.get_or_init(|| {
        vec![
            Template::parse("T", "", TAO),
            Template::parse("H", "q", HAAGERUP),
            Template::parse("F_22", "q", F22),
            Template::parse("F_23", "rs", F23),
            Template::parse("F_32", "rs", F32),
            Template::parse("P", "q", PETRESCU),
            Template::parse("BF", "a", &bjorck_froberg_text()),
        ]
    })
}

/// The template of a parametric family (`T`, `H`, `F_22`, `F_23`, `F_32`,
/// `P`, `BF`).
pub fn template(name: &str) -> Option<&'static Template> {
    templates().iter().find(|t| t.name == name)
}

/// Root of `a^2 - (1 - sqrt 3) a + 1 = 0` in the upper or lower half plane.
pub fn bjorck_froberg_root(upper: bool) -> Complex64 {
    let b = 1.0 - 3f64.sqrt();
    let im = (4.0 - b * b).sqrt() / 2.0;
    Complex64::new(b / 2.0, if upper { im } else { -im })
}

const X9_10: [&str; 9] = [
    "000000000",
    "053359871",
    "045713599",
    "037518935",
    "091553727",
    "095135176",
    "017961553",
    "079495351",
    "052977315",
];
const X10_4: [&str; 10] = [
    "0000000000",
    "0233331111",
    "0321133311",
    "0312313131",
    "0313211313",
    "0331121133",
    "0133112331",
    "0131313213",
    "0113133123",
    "0111331332",
];
const X10_5: [&str; 10] = [
    "0000000000",
    "0011223344",
    "0103241423",
    "0134310242",
    "0230134124",
    "0242013431",
    "0312404213",
    "0324142301",
    "0421431032",
    "0443322110",
];
const X10_6: [&str; 10] = [
    "0000000000",
    "0415313351",
    "0123551353",
    "0532153531",
    "0351411533",
    "0333330000",
    "0115343024",
    "0153524320",
    "0535120234",
    "0351144203",
];

fn digits(level: u32, rows: &[&str]) -> ButsonMatrix {
    let rows: Vec<Vec<u32>> = rows
        .iter()
        .map(|r| r.chars().map(|c| c.to_digit(10).unwrap()).collect())
        .collect();
    ButsonMatrix::from_rows(level, &rows).expect("embedded matrix is well formed")
}

/// Canonical registry names, in registry order.
pub const REGISTRY: &[&str] = &[
    "F_n", "F_22", "T", "H", "BF", "P", "F_23", "F_32", "X_9^10", "X_10^4", "X_10^5", "X_10^6",
];

/// Maps the accepted spellings to a canonical registry name.
fn canonical(name: &str) -> Option<&'static str> {
    let key: String = name
        .trim()
        .chars()
        .filter(|c| !matches!(c, '{' | '}'))
        .collect::<String>()
        .to_ascii_lowercase();
    Some(match key.as_str() {
        "t" | "tao" => "T",
        "h" | "h^q" | "haagerup" => "H",
        "bf" | "bjorck-froberg" => "BF",
        "p" | "p^q" | "petrescu" => "P",
        "f_22" | "f_22^q" => "F_22",
        "f_23" | "f_23^rs" => "F_23",
        "f_32" | "f_32^rs" => "F_32",
        "x_9^10" | "x9_10" => "X_9^10",
        "x_10^4" | "x10_4" => "X_10^4",
        "x_10^5" | "x10_5" => "X_10^5",
        "x_10^6" | "x10_6" => "X_10^6",
        _ => return None,
    })
}

/// Size of a Fourier name: `F_<n>` (other than the family names) or
/// `fourier:<n>`.
fn fourier_size(name: &str) -> Option<usize> {
    let name = name.trim();
    let digits = name
        .strip_prefix("F_")
        .or_else(|| name.strip_prefix("fourier:"))?;
    let n: usize = digits.parse().ok()?;
    (n >= 1).then_some(n)
}

/// Number of parameters the named matrix takes.
pub fn param_count(name: &str) -> Result<usize> {
    if let Some(c) = canonical(name) {
        return Ok(match c {
            "BF" => 0,
            c => template(c).map_or(0, |t| t.params.len()),
        });
    }
    if fourier_size(name).is_some() {
        return Ok(0);
    }
    Err(Error::UnknownName(name.to_string()))
}

/// Looks up a registry matrix. `F_22`, `F_23` and `F_32` name the
/// parametric families; Fourier matrices of those sizes are spelled
/// `fourier:22` and so on.
pub fn named(name: &str, params: &[Phase]) -> Result<HadamardMatrix> {
    let expect = |k: usize| {
        if params.len() != k {
            Err(Error::MissingParameter {
                name: name.to_string(),
                expected: k,
                got: params.len(),
            })
        } else {
            Ok(())
        }
    };
    match canonical(name) {
        Some("BF") => {
            expect(0)?;
            let a = Phase::Unit(bjorck_froberg_root(true));
            template("BF").unwrap().instantiate(&[a])
        }
        Some(x @ ("X_9^10" | "X_10^4" | "X_10^5" | "X_10^6")) => {
            expect(0)?;
            Ok(match x {
                "X_9^10" => digits(10, &X9_10),
                "X_10^4" => digits(4, &X10_4),
                "X_10^5" => digits(5, &X10_5),
                _ => digits(6, &X10_6),
            }
            .into())
        }
        Some(c) => template(c).unwrap().instantiate(params),
        None => match fourier_size(name) {
            Some(n) => {
                expect(0)?;
                Ok(fourier(n).into())
            }
            None => Err(Error::UnknownName(name.to_string())),
        },
    }
}
