use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qperm::hadamard::{named, parse_phase, read_matrix};
use serde_json::Value;
use tempfile::TempDir;

fn qperm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qperm"))
        .args(args)
        .env_remove("QPERM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = qperm(&all);
    (
        serde_json::from_slice(&o.stdout).expect("valid JSON"),
        code(&o),
    )
}

fn build(dir: &Path, file: &str, name: &str, params: &[&str]) -> PathBuf {
    let path = dir.join(file);
    let mut args = vec!["construct", name];
    for p in params {
        args.extend(["-p", p]);
    }
    args.extend(["-o", path.to_str().unwrap()]);
    let o = qperm(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    path
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// The report's top-level keys are exactly the schema's properties, and
/// every required key is present.
fn assert_schema(verb: &str, report: &Value) {
    let schema = schema();
    let mut def = &schema["$defs"][verb];
    if let Some(r) = def.get("$ref").and_then(Value::as_str) {
        def = &schema["$defs"][r.rsplit('/').next().unwrap()];
    }
    let obj = report
        .as_object()
        .unwrap_or_else(|| panic!("{verb}: report is not an object"));
    let mut props: Vec<&str> = def["properties"]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    if let Some(all) = def.get("allOf") {
        let r = all[0]["$ref"].as_str().unwrap();
        let base = &schema["$defs"][r.rsplit('/').next().unwrap()];
        props.extend(
            base["properties"]
                .as_object()
                .unwrap()
                .keys()
                .map(String::as_str),
        );
    }
    for key in def["required"].as_array().unwrap() {
        assert!(
            obj.contains_key(key.as_str().unwrap()),
            "{verb}: missing {key}"
        );
    }
    for key in obj.keys() {
        assert!(
            props.contains(&key.as_str()),
            "{verb}: undocumented key {key}"
        );
    }
}

#[test]
fn check_reports_tao_profile() {
    let dir = TempDir::new().unwrap();
    let tao = build(dir.path(), "tao.blog", "T", &[]);
    let o = qperm(&["check", tao.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o).trim(),
        "hadamard: true, level: 3, regular: true (15× [3,3])"
    );
}

#[test]
fn check_rejects_non_hadamard() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.blog");
    std::fs::write(&path, "2 2\n0 0\n0 0\n").unwrap();
    let o = qperm(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("hadamard: false"));
}

#[test]
fn obstruct_names_the_reason() {
    let o = qperm(&["obstruct", "5", "6"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).trim(), "Empty (de Launey)");
    let o = qperm(&["obstruct", "6", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "Exists (H)");
    let (j, c) = json(&["obstruct", "5", "6"]);
    assert_eq!(c, 1);
    assert_eq!(j["status"], "empty");
    assert_eq!(j["obstruction"], "DeLauney");
}

#[test]
fn table_has_one_line_per_order() {
    let o = qperm(&["table", "--nmax", "10", "--lmax", "14"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines[0].starts_with("n\\l"));
    assert_eq!(
        lines[4].split_whitespace().collect::<Vec<_>>()[..5],
        ["5", "o", "o", "o", "F_5"]
    );
    let (j, _) = json(&["table", "--nmax", "10", "--lmax", "14"]);
    let cells: usize = j["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().len())
        .sum();
    assert_eq!(cells, 117);
}

#[test]
fn blog_written_by_construct_reads_back_exactly() {
    let dir = TempDir::new().unwrap();
    let path = build(dir.path(), "x.blog", "X_9^10", &[]);
    assert_eq!(read_matrix(&path).unwrap(), named("X_9^10", &[]).unwrap());
}

#[test]
fn cmat_round_trip_within_tolerance() {
    let dir = TempDir::new().unwrap();
    let path = build(dir.path(), "h.cmat", "H", &["exp:1"]);
    let back = read_matrix(&path).unwrap();
    let want = named("H", &[parse_phase("exp:1").unwrap()]).unwrap();
    assert!(back.approx_eq(&want, 1e-15));
}

#[test]
fn malformed_blog_reports_line() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.blog");
    std::fs::write(&path, "3 3\n0 0 0\n0 1\n0 2 1\n").unwrap();
    let o = qperm(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    let o = qperm(&["frobnicate"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("Usage"));
    assert_eq!(code(&qperm(&["obstruct", "5"])), 2);
    assert_eq!(code(&qperm(&["construct", "H", "-p", "2,0"])), 2);
    assert_eq!(code(&qperm(&["construct", "nope"])), 2);
    assert_eq!(code(&qperm(&["check", "/nonexistent/file.blog"])), 2);
    assert_eq!(code(&qperm(&["--help"])), 0);
}

#[test]
fn thread_env_fallback_is_read() {
    let o = Command::new(env!("CARGO_BIN_EXE_qperm"))
        .args(["obstruct", "2", "2"])
        .env("QPERM_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--threads"));
}

#[test]
fn equiv_decisions_and_witness() {
    let dir = TempDir::new().unwrap();
    let f22 = build(dir.path(), "f22.cmat", "F_22", &["1/4"]);
    let f4 = build(dir.path(), "f4.blog", "F_4", &[]);
    let o = qperm(&["equiv", f22.to_str().unwrap(), f4.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("equivalent\nrow_perm:"));

    let tao = build(dir.path(), "t.blog", "T", &[]);
    let h = build(dir.path(), "h.cmat", "H", &["1"]);
    let o = qperm(&["equiv", tao.to_str().unwrap(), h.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).trim(), "not equivalent");

    let (j, c) = json(&["equiv", tao.to_str().unwrap(), h.to_str().unwrap()]);
    assert_eq!((j["outcome"].as_str(), c), (Some("not_equivalent"), 1));
}

#[test]
fn regular_and_classify_on_bjorck_froberg() {
    let dir = TempDir::new().unwrap();
    let bf = build(dir.path(), "bf.cmat", "BF", &[]);
    let o = qperm(&["regular", bf.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o)
        .lines()
        .last()
        .unwrap()
        .starts_with("regular: false"));
    assert_eq!(code(&qperm(&["classify6", bf.to_str().unwrap()])), 1);
}

#[test]
fn classify6_names_family_and_parameters() {
    let dir = TempDir::new().unwrap();
    let h = build(dir.path(), "h.cmat", "H", &["1/8"]);
    let o = qperm(&["classify6", h.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("family: H\nparameters: q = "), "{text}");
    let (j, _) = json(&["classify6", h.to_str().unwrap()]);
    assert_eq!(j["family"], "H");
    assert_eq!(j["parameters"].as_array().unwrap().len(), 1);
}

#[test]
fn invariants_of_fourier() {
    let dir = TempDir::new().unwrap();
    let f = build(dir.path(), "f5.blog", "F_5", &[]);
    let o = qperm(&["invariants", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(
        text.starts_with("seed: 0\nendu_dim: 5\ngram_components: 5\n"),
        "{text}"
    );
    assert!(text.contains("hom(1,1): 5"));
    assert!(text.contains("fourier_tensor: [5]"));
    let (j, _) = json(&["invariants", f.to_str().unwrap()]);
    assert_eq!(j["latin"]["group"]["order"], 5);
    assert_eq!(j["latin"]["group"]["cyclic"], true);
}

#[test]
fn enumerate_exit_codes() {
    let o = qperm(&["enumerate", "6", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("BH(6,3): 1 class, complete"));
    assert_eq!(code(&qperm(&["enumerate", "6", "2"])), 1);
    assert_eq!(code(&qperm(&["enumerate", "6", "6", "--budget", "10"])), 3);
}

#[test]
fn enumerate_writes_representatives() {
    let dir = TempDir::new().unwrap();
    let o = qperm(&[
        "enumerate",
        "4",
        "4",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 2);
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = TempDir::new().unwrap();
    let f = build(dir.path(), "f4.blog", "F_4", &[]);
    let f = f.to_str().unwrap();
    for args in [
        vec!["enumerate", "6", "6"],
        vec!["table"],
        vec!["invariants", f, "--method", "sketch", "--seed", "7"],
    ] {
        let one = qperm(&[&["--threads", "1"], &args[..]].concat());
        let four = qperm(&[&["--threads", "4"], &args[..]].concat());
        assert_eq!(code(&one), 0, "{}", stderr(&one));
        assert_eq!(one.stdout, four.stdout, "{args:?}");
    }
    let o = qperm(&["invariants", f, "--method", "sketch", "--seed", "7"]);
    assert!(stdout(&o).starts_with("seed: 7\n"));
}

#[test]
fn json_reports_follow_schema() {
    let dir = TempDir::new().unwrap();
    let tao = build(dir.path(), "t.blog", "T", &[]);
    let t = tao.to_str().unwrap();
    let h = build(dir.path(), "h.cmat", "H", &["1/3"]);
    let h = h.to_str().unwrap();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("check", vec!["check", t]),
        ("construct", vec!["construct", "F_3"]),
        ("equiv", vec!["equiv", t, t]),
        ("equiv", vec!["equiv", t, h]),
        ("regular", vec!["regular", t]),
        ("invariants", vec!["invariants", t, "--max-order", "1"]),
        ("obstruct", vec!["obstruct", "5", "6"]),
        ("obstruct", vec!["obstruct", "5", "5"]),
        ("table", vec!["table", "--nmax", "4", "--lmax", "4"]),
        ("classify6", vec!["classify6", h]),
        ("enumerate", vec!["enumerate", "4", "2"]),
    ];
    for (verb, args) in cases {
        let (j, _) = json(&args);
        assert_schema(verb, &j);
    }
}

#[test]
fn text_and_json_agree_on_decisions() {
    for (n, l) in [(5u32, 6u32), (6, 4), (7, 6), (10, 14)] {
        let (n, l) = (n.to_string(), l.to_string());
        let text = qperm(&["obstruct", &n, &l]);
        let (j, c) = json(&["obstruct", &n, &l]);
        assert_eq!(code(&text), c);
        let empty = stdout(&text).starts_with("Empty");
        assert_eq!(empty, j["status"] == "empty");
    }
}
