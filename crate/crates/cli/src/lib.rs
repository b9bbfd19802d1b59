//! The `qperm` command-line front end.
//!
//! [`run`] parses arguments, executes one verb and renders its report as
//! text or JSON. The return value is the process exit code:
//! 0 success, 1 a negative answer from a decision verb, 2 usage or input
//! errors, 3 budget or resource exhaustion.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qperm::classify6::{classify_regular6, enumerate_butson, FamilyTag};
use qperm::hadamard::{
    equivalent_with_budget, format_matrix, is_hadamard, is_regular, level, named, parse_phase,
    read_matrix, write_blog, write_matrix, EquivalenceOutcome, EquivalenceWitness, HadamardFailure,
    HadamardMatrix, Phase, RegularityReport, DEFAULT_NODE_BUDGET,
};
use qperm::magic::{
    detect_latin, fourier_tensor_decompose, gram_graph, hom_dim_with, latin_group,
    magic_from_hadamard, HomMethod, HomOptions,
};
use qperm::obstructions::{decide, table, Status};
use qperm::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "qperm",
    version,
    about = "Complex Hadamard matrices and their quantum permutation invariants"
)]
struct Cli {
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "QPERM_THREADS")]
    threads: Option<usize>,
    /// Seed for randomised rank estimates.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Checks the Hadamard property, the Butson level and regularity.
    Check { file: PathBuf },
    /// Builds a registry matrix.
    Construct {
        /// Registry name, e.g. F_6, T, H, P, BF, F_23, X_9^10.
        name: String,
        /// A parameter as k/l, re,im or exp:theta; repeat in template order.
        #[arg(short = 'p', long = "param", allow_hyphen_values = true, value_parser = phase_arg)]
        params: Vec<Phase>,
        /// Output path; the extension picks .blog or .cmat.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Searches for an equivalence between two matrices.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Decomposes every row-pair product into cycles.
    Regular { file: PathBuf },
    /// Computes the quantum permutation invariants of a matrix.
    Invariants {
        file: PathBuf,
        /// Largest k + l for the Hom(k, l) dimensions.
        #[arg(long, default_value_t = 2)]
        max_order: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Decides whether BH(n, l) is empty.
    Obstruct { n: u32, l: u32 },
    /// Renders the existence table for 2 <= n <= nmax, 2 <= l <= lmax.
    Table {
        #[arg(long, default_value_t = 10)]
        nmax: u32,
        #[arg(long, default_value_t = 14)]
        lmax: u32,
    },
    /// Identifies the family of a regular 6x6 matrix.
    Classify6 { file: PathBuf },
    /// Enumerates BH(n, l) up to equivalence.
    Enumerate {
        n: usize,
        l: u32,
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
        /// Also write each class representative to this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Auto,
    Exact,
    Sketch,
}

impl From<MethodArg> for HomMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => HomMethod::Auto,
            MethodArg::Exact => HomMethod::ExactDense,
            MethodArg::Sketch => HomMethod::RandomSketch,
        }
    }
}

fn phase_arg(s: &str) -> Result<Phase, String> {
    parse_phase(s).map_err(|e| e.message)
}

/// A rendered verb result.
struct Report {
    text: String,
    json: Value,
    code: i32,
}

impl Report {
    fn new(text: String, json: Value, code: i32) -> Self {
        Self { text, json, code }
    }
}

/// Failure carrying its exit code.
struct Failure {
    message: String,
    code: i32,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_USAGE,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: error_code(&e),
            message: e.to_string(),
        }
    }
}

/// Exit code for a library error.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::ResourceCap { .. } | Error::GroupTooLarge { .. } | Error::UnstableRank { .. } => {
            EXIT_RESOURCE
        }
        Error::NotMixedRegular(..) | Error::ClassificationFailure(_) => EXIT_NO,
        _ => EXIT_USAGE,
    }
}

/// Runs the CLI on `args` (including the program name), writing the report
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{text}");
            return EXIT_OK;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::usage("--threads must be positive")),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Failure::usage(e.to_string())),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(report) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&report.json).expect("JSON values serialise")
            } else {
                report.text.trim_end().to_string()
            };
            let _ = writeln!(out, "{body}");
            report.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Check { file } => check(&load(file)?),
        Command::Construct { name, params, out } => construct(name, params, out.as_deref()),
        Command::Equiv { a, b, budget } => equiv(&load(a)?, &load(b)?, *budget),
        Command::Regular { file } => regular(&load(file)?),
        Command::Invariants {
            file,
            max_order,
            method,
        } => invariants(&load(file)?, *max_order, (*method).into(), cli.seed),
        Command::Obstruct { n, l } => obstruct(*n, *l),
        Command::Table { nmax, lmax } => {
            let t = table(*nmax, *lmax)?;
            Ok(Report::new(t.render(), json!(t), EXIT_OK))
        }
        Command::Classify6 { file } => classify6(&load(file)?),
        Command::Enumerate {
            n,
            l,
            budget,
            out_dir,
        } => enumerate(*n, *l, *budget, out_dir.as_deref()),
    }
}

fn load(path: &Path) -> Result<HadamardMatrix, Failure> {
    read_matrix(path).map_err(|e| Failure {
        code: error_code(&e),
        message: format!("{}: {e}", path.display()),
    })
}

/// `15× [3,3]`-style summary of the cycle profiles, or `None` when some
/// pair does not split into cycles.
fn profile_summary(r: &RegularityReport) -> Vec<(Vec<u32>, usize)> {
    let mut counts: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for p in &r.pairs {
        if let Some(profile) = &p.profile {
            *counts.entry(profile.clone()).or_default() += 1;
        }
    }
    counts.into_iter().collect()
}

fn format_profile(p: &[u32]) -> String {
    let parts: Vec<String> = p.iter().map(u32::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn regularity_text(r: &RegularityReport) -> String {
    if r.regular {
        let parts: Vec<String> = profile_summary(r)
            .iter()
            .map(|(p, c)| format!("{c}× {}", format_profile(p)))
            .collect();
        format!("regular: true ({})", parts.join(", "))
    } else {
        let bad = r.pairs.iter().filter(|p| p.profile.is_none()).count();
        format!(
            "regular: false ({bad} of {} pairs do not split into cycles)",
            r.pairs.len()
        )
    }
}

fn regularity_json(r: &RegularityReport) -> Value {
    let summary: Vec<Value> = profile_summary(r)
        .into_iter()
        .map(|(p, c)| json!({ "profile": p, "count": c }))
        .collect();
    json!({ "regular": r.regular, "summary": summary, "pairs": r.pairs })
}

fn failure_text(f: &HadamardFailure) -> String {
    match f {
        HadamardFailure::NotUnimodular { row, col, modulus } => {
            format!("entry ({row},{col}) has modulus {modulus}")
        }
        HadamardFailure::NotOrthogonal { rows, residual } => {
            format!(
                "rows {} and {} are not orthogonal, residual {residual:.3e}",
                rows.0, rows.1
            )
        }
    }
}

fn check(h: &HadamardMatrix) -> Result<Report, Failure> {
    let c = is_hadamard(h);
    let lvl = h.as_butson().map(level);
    let level_text = lvl.map_or("none".to_string(), |l| l.to_string());
    if !c.hadamard {
        let why = c.failure.as_ref().map(failure_text).unwrap_or_default();
        let text = format!("hadamard: false ({why}), level: {level_text}");
        let j = json!({ "n": h.n(), "hadamard": false, "failure": c.failure, "level": lvl, "regularity": null });
        return Ok(Report::new(text, j, EXIT_NO));
    }
    let r = is_regular(h)?;
    let text = format!(
        "hadamard: true, level: {level_text}, {}",
        regularity_text(&r)
    );
    let j = json!({
        "n": h.n(),
        "hadamard": true,
        "failure": null,
        "level": lvl,
        "regularity": regularity_json(&r),
    });
    Ok(Report::new(text, j, EXIT_OK))
}

fn construct(name: &str, params: &[Phase], out: Option<&Path>) -> Result<Report, Failure> {
    let h = named(name, params)?;
    let payload = format_matrix(&h);
    let mut j = json!({ "name": name, "n": h.n(), "butson": h.is_butson(), "path": null, "payload": payload });
    let text = match out {
        Some(path) => {
            write_matrix(path, &h)?;
            j["path"] = json!(path.display().to_string());
            format!("wrote {} ({}x{})", path.display(), h.n(), h.n())
        }
        None => payload,
    };
    Ok(Report::new(text, j, EXIT_OK))
}

/// `k/l` for roots of unity (also for unit values within 1e-12 of a root of
/// order at most 60), otherwise `re,im` to 12 decimals.
fn phase_text(p: &Phase) -> String {
    if (p.to_complex() - 1.0).norm() < 1e-12 {
        return "1".to_string();
    }
    match p {
        Phase::Root { .. } => p.to_string(),
        Phase::Unit(z) => {
            let turns = z.arg() / std::f64::consts::TAU;
            for den in 1..=60u32 {
                let num = (turns * den as f64).round() as i64;
                let snapped = Phase::root(num, den);
                if (snapped.to_complex() - z).norm() < 1e-12 {
                    return snapped.to_string();
                }
            }
            let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
            format!("{:.12},{:.12}", clean(z.re), clean(z.im))
        }
    }
}

fn phases_text(p: &[Phase]) -> String {
    let parts: Vec<String> = p.iter().map(phase_text).collect();
    format!("[{}]", parts.join(" "))
}

fn witness_text(w: &EquivalenceWitness) -> String {
    format!(
        "row_perm: {:?}\ncol_perm: {:?}\nrow_scalars: {}\ncol_scalars: {}",
        w.row_perm,
        w.col_perm,
        phases_text(&w.row_scalars),
        phases_text(&w.col_scalars)
    )
}

fn equiv(a: &HadamardMatrix, b: &HadamardMatrix, budget: u64) -> Result<Report, Failure> {
    let outcome = equivalent_with_budget(a, b, budget)?;
    let (text, code) = match &outcome {
        EquivalenceOutcome::Equivalent { witness } => {
            (format!("equivalent\n{}", witness_text(witness)), EXIT_OK)
        }
        EquivalenceOutcome::NotEquivalent => ("not equivalent".to_string(), EXIT_NO),
        EquivalenceOutcome::Undecided { nodes } => (
            format!("undecided: node budget exhausted after {nodes} nodes"),
            EXIT_RESOURCE,
        ),
    };
    let mut j = json!(outcome);
    j["budget"] = json!(budget);
    Ok(Report::new(text, j, code))
}

fn regular(h: &HadamardMatrix) -> Result<Report, Failure> {
    let r = is_regular(h)?;
    let mut text = String::new();
    for p in &r.pairs {
        let profile = p
            .profile
            .as_deref()
            .map_or("none".to_string(), format_profile);
        text.push_str(&format!("rows ({},{}): {profile}\n", p.rows.0, p.rows.1));
    }
    text.push_str(&regularity_text(&r));
    let code = if r.regular { EXIT_OK } else { EXIT_NO };
    Ok(Report::new(text, regularity_json(&r), code))
}

fn invariants(
    h: &HadamardMatrix,
    max_order: usize,
    method: HomMethod,
    seed: u64,
) -> Result<Report, Failure> {
    let xi = magic_from_hadamard(h);
    let opts = HomOptions {
        seed,
        ..HomOptions::default()
    };
    let endu = hom_dim_with(&xi, 1, 1, method, &opts)?;
    let components = gram_graph(&xi).components();
    let mut text = format!("seed: {seed}\nendu_dim: {endu}\ngram_components: {components}\n");
    let mut hom = Vec::new();
    for total in 1..=max_order {
        for k in 0..=total {
            let l = total - k;
            match hom_dim_with(&xi, k, l, method, &opts) {
                Ok(d) => {
                    text.push_str(&format!("hom({k},{l}): {d}\n"));
                    hom.push(json!({ "k": k, "l": l, "dim": d, "skipped": null }));
                }
                Err(e) if error_code(&e) == EXIT_RESOURCE => {
                    text.push_str(&format!("hom({k},{l}): skipped ({e})\n"));
                    hom.push(json!({ "k": k, "l": l, "dim": null, "skipped": e.to_string() }));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let latin =
        match detect_latin(&xi) {
            Some(s) => {
                let g = latin_group(&s)?;
                let rows: Vec<String> = s
                    .rows()
                    .iter()
                    .map(|r| r.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
                    .collect();
                let factors = g.invariant_factors();
                text.push_str(&format!(
                "latin: {}\nlatin_group: order {}, abelian {}, cyclic {}, invariant factors {}\n",
                rows.join(" / "),
                g.order,
                g.abelian,
                g.is_cyclic(),
                factors.as_ref().map_or("none".to_string(), |f| format!("{f:?}"))
            ));
                json!({
                    "square": s.rows(),
                    "group": {
                        "order": g.order,
                        "abelian": g.abelian,
                        "cyclic": g.is_cyclic(),
                        "invariant_factors": factors,
                    },
                })
            }
            None => {
                text.push_str("latin: none\n");
                Value::Null
            }
        };
    let fourier = fourier_tensor_decompose(h);
    text.push_str(&format!(
        "fourier_tensor: {}",
        fourier
            .as_ref()
            .map_or("none".to_string(), |f| format!("{f:?}"))
    ));
    let j = json!({
        "seed": seed,
        "endu_dim": endu,
        "gram_components": components,
        "hom_dims": hom,
        "latin": latin,
        "fourier_tensor": fourier,
    });
    Ok(Report::new(text, j, EXIT_OK))
}

fn obstruct(n: u32, l: u32) -> Result<Report, Failure> {
    let v = decide(n, l)?;
    let (text, reason, code) = match &v.status {
        Status::Empty { obstruction } => (
            format!("Empty ({})", obstruction.name()),
            Some(obstruction.name()),
            EXIT_NO,
        ),
        Status::Exists { witness } => (format!("Exists ({witness})"), None, EXIT_OK),
        Status::Inconclusive => ("Inconclusive".to_string(), None, EXIT_OK),
    };
    let mut j = json!(v);
    j["reason"] = json!(reason);
    Ok(Report::new(text, j, code))
}

fn classify6(h: &HadamardMatrix) -> Result<Report, Failure> {
    let tag: FamilyTag = classify_regular6(h)?;
    let names = tag.family.param_names();
    let params: Vec<String> = names
        .iter()
        .zip(&tag.parameters)
        .map(|(n, p)| format!("{n} = {}", phase_text(p)))
        .collect();
    let text = format!(
        "family: {}\nparameters: {}\n{}",
        tag.family,
        if params.is_empty() {
            "none".to_string()
        } else {
            params.join(", ")
        },
        witness_text(&tag.witness)
    );
    let mut j = json!(tag);
    j["family"] = json!(tag.family.template_name());
    j["parameter_names"] = json!(names);
    Ok(Report::new(text, j, EXIT_OK))
}

fn enumerate(n: usize, l: u32, budget: u64, out_dir: Option<&Path>) -> Result<Report, Failure> {
    let e = enumerate_butson(n, l, budget)?;
    let payloads: Vec<String> = e.matrices.iter().map(write_blog).collect();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|err| Failure::usage(format!("{}: {err}", dir.display())))?;
        for (i, m) in e.matrices.iter().enumerate() {
            let path = dir.join(format!("bh_{n}_{l}_{i}.blog"));
            write_matrix(&path, &m.clone().into())?;
        }
    }
    let classes = e.matrices.len();
    let mut text = format!(
        "BH({n},{l}): {classes} class{}, {} ({} nodes)\n",
        if classes == 1 { "" } else { "es" },
        if e.complete {
            "complete"
        } else {
            "incomplete: node budget exhausted"
        },
        e.nodes
    );
    for p in &payloads {
        text.push('\n');
        text.push_str(p);
    }
    let code = match (e.complete, classes) {
        (false, _) => EXIT_RESOURCE,
        (true, 0) => EXIT_NO,
        (true, _) => EXIT_OK,
    };
    let j = json!({
        "n": n,
        "level": l,
        "complete": e.complete,
        "nodes": e.nodes,
        "classes": classes,
        "matrices": payloads,
    });
    Ok(Report::new(text, j, code))
}
