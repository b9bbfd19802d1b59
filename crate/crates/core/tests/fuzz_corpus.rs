//! Replays the checked-in fuzz corpus through the same checks as the fuzz
//! targets, so regressions show up without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

use qperm::hadamard::{parse_blog, parse_cmat, parse_phase, write_blog, write_cmat, Phase};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (
                name,
                String::from_utf8_lossy(&fs::read(&path).unwrap()).into_owned(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn blog_seeds() {
    let mut accepted = 0;
    for (name, text) in seeds("parse_blog") {
        let Ok(m) = parse_blog(&text) else { continue };
        accepted += 1;
        assert_eq!(parse_blog(&write_blog(&m)).unwrap(), m, "{name}");
    }
    assert!(accepted >= 4);
}

#[test]
fn cmat_seeds() {
    let mut accepted = 0;
    for (name, text) in seeds("parse_cmat") {
        let Ok(m) = parse_cmat(&text) else { continue };
        accepted += 1;
        let written = write_cmat(&m);
        assert_eq!(
            write_cmat(&parse_cmat(&written).unwrap()),
            written,
            "{name}"
        );
    }
    assert!(accepted >= 3);
}

#[test]
fn phase_seeds() {
    let mut accepted = 0;
    for (name, text) in seeds("parse_phase") {
        let Ok(p) = parse_phase(&text) else { continue };
        accepted += 1;
        assert!((p.to_complex().norm() - 1.0).abs() < 1e-6, "{name}");
        if let Phase::Root { .. } = p {
            assert_eq!(parse_phase(&p.to_string()).unwrap(), p, "{name}");
        }
    }
    assert!(accepted >= 5);
}
