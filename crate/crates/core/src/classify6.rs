//! Regular complex Hadamard matrices of order 6: row graphs, the family
//! classifier, and a small exhaustive Butson enumerator.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclotomic::{cycle_decompose_approx_with, CyclotomicInt};
use crate::error::{Error, Result};
use crate::hadamard::{
    dephase_at, equivalent, template, ButsonMatrix, EquivalenceOutcome, EquivalenceWitness,
    HadamardMatrix, Phase, Template,
};

/// Tolerance for deciding product types of float rows.
pub const PRODUCT_TOL: f64 = 1e-6;
/// Tolerance for matching entries against family templates.
pub const ENTRY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductKind {
    /// `x - x + y - y + z - z`.
    Binary,
    /// `x(1 + w + w^2) + y(1 + w + w^2)`.
    Ternary,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductType {
    pub kind: ProductKind,
    /// The rotations `x, y, z` (binary) or `x, y` (ternary).
    pub rotations: Vec<Complex64>,
}

/// Classifies the coordinatewise product `row_i * conj(row_j)` of two
/// unit-modulus rows of length 6.
pub fn product_type(row_i: &[Complex64], row_j: &[Complex64], tol: f64) -> ProductType {
    let v: Vec<Complex64> = row_i.iter().zip(row_j).map(|(a, b)| a * b.conj()).collect();
    for (kind, prime) in [(ProductKind::Ternary, 3), (ProductKind::Binary, 2)] {
        if let Ok(Some(d)) = cycle_decompose_approx_with(&v, tol, &[prime]) {
            return ProductType {
                kind,
                rotations: d
                    .cycles
                    .iter()
                    .map(|c| Complex64::from_polar(1.0, c.rotation))
                    .collect(),
            };
        }
    }
    ProductType {
        kind: ProductKind::Other,
        rotations: Vec::new(),
    }
}

/// The complete graph on the 6 rows, edges coloured 2 (binary) or 3
/// (ternary).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowGraph {
    colors: [[u8; 6]; 6],
}

impl RowGraph {
    /// Builds a graph from an explicit colouring; the diagonal is ignored.
    pub fn from_colors(colors: [[u8; 6]; 6]) -> Result<Self> {
        for i in 0..6 {
            for j in 0..6 {
                if i != j && (colors[i][j] != colors[j][i] || !matches!(colors[i][j], 2 | 3)) {
                    return Err(Error::InvalidValue(format!(
                        "bad row graph colour at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { colors })
    }

    pub fn color(&self, i: usize, j: usize) -> u8 {
        self.colors[i][j]
    }

    pub fn edges(&self, color: u8) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..6 {
            for j in i + 1..6 {
                if self.colors[i][j] == color {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn monochrome(&self, set: &[usize], color: u8) -> bool {
        set.iter()
            .enumerate()
            .all(|(a, &i)| set[a + 1..].iter().all(|&j| self.colors[i][j] == color))
    }

    fn triangles(&self, color: u8) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                for c in b + 1..6 {
                    if self.monochrome(&[a, b, c], color) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    fn pattern(&self) -> Pattern {
        let binary = self.edges(2);
        if binary.is_empty() {
            return Pattern::AllTernary;
        }
        if binary.len() == 15 {
            return Pattern::AllBinary;
        }
        let mut touched = [false; 6];
        let matching = binary.len() == 3
            && binary.iter().all(|&(i, j)| {
                !std::mem::replace(&mut touched[i], true)
                    && !std::mem::replace(&mut touched[j], true)
            });
        if matching {
            return Pattern::BinaryMatching;
        }
        let tri = self.triangles(3);
        let split = tri.len() == 2
            && tri[0].iter().all(|v| !tri[1].contains(v))
            && self.edges(3).len() == 6;
        if split {
            Pattern::TwoTernaryTriangles
        } else {
            Pattern::Unrecognised
        }
    }
}

impl fmt::Display for RowGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..6 {
            let row: Vec<String> = (0..6)
                .map(|j| {
                    if i == j {
                        ".".into()
                    } else {
                        self.colors[i][j].to_string()
                    }
                })
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pattern {
    AllTernary,
    AllBinary,
    BinaryMatching,
    TwoTernaryTriangles,
    Unrecognised,
}

pub fn row_graph(h: &HadamardMatrix) -> Result<RowGraph> {
    if h.n() != 6 {
        return Err(Error::Shape(format!(
            "row graphs need n = 6, got {}",
            h.n()
        )));
    }
    let rows = h.rows();
    let mut colors = [[0u8; 6]; 6];
    for i in 0..6 {
        for j in i + 1..6 {
            let c = match product_type(&rows[i], &rows[j], PRODUCT_TOL).kind {
                ProductKind::Binary => 2,
                ProductKind::Ternary => 3,
                ProductKind::Other => return Err(Error::NotMixedRegular(i, j)),
            };
            colors[i][j] = c;
            colors[j][i] = c;
        }
    }
    Ok(RowGraph { colors })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MixedReport {
    pub binary_triangle: Option<[usize; 3]>,
    /// Four rows whose six products are all ternary.
    pub ternary_square: Option<[usize; 4]>,
    pub ternary_triangle: Option<[usize; 3]>,
}

impl MixedReport {
    pub fn passes(&self) -> bool {
        self.binary_triangle.is_none()
            && self.ternary_square.is_none()
            && self.ternary_triangle.is_some()
    }
}

/// The three necessary conditions on a mixed row graph.
pub fn check_mixed_constraints(g: &RowGraph) -> MixedReport {
    let mut square = None;
    'outer: for a in 0..6 {
        for b in a + 1..6 {
            for c in b + 1..6 {
                for d in c + 1..6 {
                    if g.monochrome(&[a, b, c, d], 3) {
                        square = Some([a, b, c, d]);
                        break 'outer;
                    }
                }
            }
        }
    }
    MixedReport {
        binary_triangle: g.triangles(2).first().copied(),
        ternary_square: square,
        ternary_triangle: g.triangles(3).first().copied(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    Tao,
    Haagerup,
    Dita23,
    Dita32,
}

impl Family {
    pub fn template_name(self) -> &'static str {
        match self {
            Family::Tao => "T",
            Family::Haagerup => "H",
            Family::Dita23 => "F_23",
            Family::Dita32 => "F_32",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Tao => &[],
            Family::Haagerup => &["q"],
            Family::Dita23 | Family::Dita32 => &["r", "s"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.template_name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyTag {
    pub family: Family,
    pub parameters: Vec<Phase>,
    /// Maps the input onto the family template at `parameters`.
    pub witness: EquivalenceWitness,
}

impl FamilyTag {
    pub fn representative(&self) -> Result<HadamardMatrix> {
        template(self.family.template_name())
            .expect("families have templates")
            .instantiate(&self.parameters)
    }
}

/// Identifies the family of a regular 6x6 complex Hadamard matrix.
pub fn classify_regular6(h: &HadamardMatrix) -> Result<FamilyTag> {
    // Every product being binary or ternary is exactly regularity at n = 6.
    let graph = row_graph(h)?;
    use Family::*;
    let order: &[Family] = match graph.pattern() {
        Pattern::AllTernary => &[Tao],
        Pattern::AllBinary => &[Haagerup],
        Pattern::BinaryMatching => &[Dita23, Dita32, Haagerup, Tao],
        Pattern::TwoTernaryTriangles => &[Dita32, Dita23, Haagerup, Tao],
        Pattern::Unrecognised => &[Dita23, Dita32, Haagerup, Tao],
    };
    for &family in order {
        let t = template(family.template_name()).expect("families have templates");
        if let Some((parameters, witness)) = match_template(h, t, ENTRY_TOL) {
            return Ok(FamilyTag {
                family,
                parameters,
                witness,
            });
        }
    }
    Err(Error::ClassificationFailure(format!(
        "no family template matches the row graph\n{graph}"
    )))
}

/// Finds parameters `p` and a witness `W` with `W(h) = t(p)`, scanning
/// pivots, then column and row arrangements, in lexicographic order.
pub fn match_template(
    h: &HadamardMatrix,
    t: &Template,
    tol: f64,
) -> Option<(Vec<Phase>, EquivalenceWitness)> {
    let n = t.n;
    if h.n() != n {
        return None;
    }
    for r0 in 0..n {
        for c0 in 0..n {
            let (d, w) = dephase_at(h, r0, c0);
            let entries: Vec<Vec<(Phase, Complex64)>> = (0..n)
                .map(|i| (0..n).map(|j| (d.entry_phase(i, j), d.get(i, j))).collect())
                .collect();
            let mut m = Matcher {
                t,
                d: &entries,
                tol,
                sigma: vec![c0],
                col_used: (0..n).map(|c| c == c0).collect(),
                pi: vec![r0],
                row_used: (0..n).map(|r| r == r0).collect(),
                params: vec![None; t.params.len()],
            };
            if m.columns() {
                let params: Vec<Phase> = m.params.iter().map(|p| p.unwrap_or(Phase::ONE)).collect();
                let witness = EquivalenceWitness {
                    row_perm: m.pi.clone(),
                    col_perm: m.sigma.clone(),
                    row_scalars: m.pi.iter().map(|&r| w.row_scalars[r]).collect(),
                    col_scalars: m.sigma.iter().map(|&c| w.col_scalars[c]).collect(),
                };
                let target = t.instantiate(&params).ok()?;
                if witness.maps(h, &target, tol.max(10.0 * h.tol())) {
                    return Some((params, witness));
                }
            }
        }
    }
    None
}

struct Matcher<'a> {
    t: &'a Template,
    d: &'a [Vec<(Phase, Complex64)>],
    tol: f64,
    sigma: Vec<usize>,
    col_used: Vec<bool>,
    pi: Vec<usize>,
    row_used: Vec<bool>,
    params: Vec<Option<Phase>>,
}

impl Matcher<'_> {
    fn columns(&mut self) -> bool {
        let n = self.t.n;
        if self.sigma.len() == n {
            return self.rows();
        }
        for c in 0..n {
            if self.col_used[c] {
                continue;
            }
            self.col_used[c] = true;
            self.sigma.push(c);
            if self.columns() {
                return true;
            }
            self.sigma.pop();
            self.col_used[c] = false;
        }
        false
    }

    fn rows(&mut self) -> bool {
        let n = self.t.n;
        let i = self.pi.len();
        if i == n {
            return true;
        }
        for r in 0..n {
            if self.row_used[r] {
                continue;
            }
            let saved = self.params.clone();
            if self.row_fits(i, r) {
                self.row_used[r] = true;
                self.pi.push(r);
                if self.rows() {
                    return true;
                }
                self.pi.pop();
                self.row_used[r] = false;
            }
            self.params = saved;
        }
        false
    }

    /// Template row `i` against dephased row `r`, binding parameters.
    fn row_fits(&mut self, i: usize, r: usize) -> bool {
        for j in 0..self.t.n {
            let cell = self.t.cell(i, j);
            let (phase, z) = self.d[r][self.sigma[j]];
            match cell.param {
                None => {
                    if (z - cell.coef.to_complex()).norm() > self.tol {
                        return false;
                    }
                }
                Some((k, conj)) => {
                    let mut p = normalise(phase.mul(cell.coef.conj()));
                    if conj {
                        p = p.conj();
                    }
                    match self.params[k] {
                        Some(q) if (q.to_complex() - p.to_complex()).norm() > self.tol => {
                            return false
                        }
                        Some(_) => {}
                        None => self.params[k] = Some(p),
                    }
                }
            }
        }
        true
    }
}

fn normalise(p: Phase) -> Phase {
    match p {
        Phase::Unit(z) => Phase::Unit(z / z.norm()),
        root => root,
    }
}

#[derive(Clone, Debug)]
pub struct EnumOptions {
    /// Node budget shared by the whole search.
    pub budget: u64,
    pub max_n: usize,
    pub max_l: u32,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self {
            budget: 50_000_000,
            max_n: 6,
            max_l: 6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Enumeration {
    pub n: usize,
    pub level: u32,
    /// One representative per equivalence class found.
    pub matrices: Vec<ButsonMatrix>,
    /// Whether the search ran to the end within its budget.
    pub complete: bool,
    pub nodes: u64,
}

pub fn enumerate_butson(n: usize, l: u32, budget: u64) -> Result<Enumeration> {
    enumerate_butson_with(
        n,
        l,
        &EnumOptions {
            budget,
            ..EnumOptions::default()
        },
    )
}

/// Exhaustive search over dephased `BH(n, l)` matrices whose rows and
/// columns are both in lexicographic order (every matrix has such a form),
/// followed by deduplication up to equivalence.
pub fn enumerate_butson_with(n: usize, l: u32, opts: &EnumOptions) -> Result<Enumeration> {
    if n == 0 || l == 0 {
        return Err(Error::InvalidValue(
            "order and level must be positive".into(),
        ));
    }
    if n > opts.max_n || l > opts.max_l {
        return Err(Error::InvalidValue(format!(
            "enumeration is limited to n <= {} and l <= {}",
            opts.max_n, opts.max_l
        )));
    }
    let space = (l as u64).pow(n as u32 - 1);
    // vanishing[idx]: the row with first entry 0 and base-l digits idx is
    // orthogonal to the all-zero row.
    let vanishing: Vec<bool> = (0..space)
        .map(|idx| {
            let exps = std::iter::once(0).chain(digits(idx, n - 1, l).into_iter().map(u64::from));
            CyclotomicInt::from_exponents(l, exps)
                .map(|z| z.is_zero())
                .unwrap_or(false)
        })
        .collect();
    let candidates: Vec<Vec<u32>> = (0..space)
        .filter(|&idx| vanishing[idx as usize])
        .map(|idx| {
            let mut row = vec![0];
            row.extend(digits(idx, n - 1, l));
            row
        })
        .collect();
    let ctx = Ctx {
        n,
        l,
        vanishing: &vanishing,
        candidates: &candidates,
        budget: opts.budget,
        nodes: AtomicU64::new(0),
    };
    let zero = vec![0u32; n];
    let (found, complete) = if n == 1 {
        (vec![vec![zero]], true)
    } else {
        let branches: Vec<(Vec<Vec<Vec<u32>>>, bool)> = (0..candidates.len())
            .into_par_iter()
            .map(|c| {
                let mut rows = vec![zero.clone()];
                let mut out = Vec::new();
                let done = ctx.place(&mut rows, c, &mut out);
                (out, done)
            })
            .collect();
        let complete = branches.iter().all(|b| b.1);
        (branches.into_iter().flat_map(|b| b.0).collect(), complete)
    };
    let mut reps: Vec<ButsonMatrix> = Vec::new();
    for rows in found {
        let m = ButsonMatrix::from_rows(l, &rows)?;
        let hm: HadamardMatrix = m.clone().into();
        let mut new = true;
        for r in &reps {
            if let EquivalenceOutcome::Equivalent { .. } = equivalent(&r.clone().into(), &hm)? {
                new = false;
                break;
            }
        }
        if new {
            reps.push(m);
        }
    }
    Ok(Enumeration {
        n,
        level: l,
        matrices: reps,
        complete,
        nodes: ctx.nodes.load(Ordering::Relaxed),
    })
}

fn digits(mut idx: u64, len: usize, l: u32) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut().rev() {
        *d = (idx % l as u64) as u32;
        idx /= l as u64;
    }
    out
}

struct Ctx<'a> {
    n: usize,
    l: u32,
    vanishing: &'a [bool],
    candidates: &'a [Vec<u32>],
    budget: u64,
    nodes: AtomicU64,
}

impl Ctx<'_> {
    fn orthogonal(&self, a: &[u32], b: &[u32]) -> bool {
        let l = self.l;
        let idx = a[1..].iter().zip(&b[1..]).fold(0u64, |acc, (&x, &y)| {
            acc * l as u64 + ((x + l - y) % l) as u64
        });
        self.vanishing[idx as usize]
    }

    /// Columns that agree on all placed rows must stay in non-decreasing
    /// order on the new row.
    fn columns_sorted(&self, rows: &[Vec<u32>], row: &[u32]) -> bool {
        (0..self.n - 1).all(|j| row[j] <= row[j + 1] || rows.iter().any(|r| r[j] != r[j + 1]))
    }

    /// Places candidate `c` as the next row and recurses; returns false if
    /// the budget ran out.
    fn place(&self, rows: &mut Vec<Vec<u32>>, c: usize, out: &mut Vec<Vec<Vec<u32>>>) -> bool {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return false;
        }
        let row = &self.candidates[c];
        if !self.columns_sorted(rows, row) || !rows[1..].iter().all(|r| self.orthogonal(row, r)) {
            return true;
        }
        rows.push(row.clone());
        let mut done = true;
        if rows.len() == self.n {
            out.push(rows.clone());
        } else {
            for next in c + 1..self.candidates.len() {
                if !self.place(rows, next, out) {
                    done = false;
                    break;
                }
            }
        }
        rows.pop();
        done
    }
}
