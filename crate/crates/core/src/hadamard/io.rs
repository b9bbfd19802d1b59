//! Text formats.
//!
//! `.blog`: first line `n l`, then `n` lines of `n` exponents in `0..l`.
//! `.cmat`: JSON `{"n": .., "tol": .., "entries": [[[re, im], ..], ..]}`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{ButsonMatrix, ComplexHadamard, HadamardMatrix, Phase};
use crate::error::{Error, ParseError, Result};

pub fn parse_blog(text: &str) -> Result<ButsonMatrix, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "empty input"))?;
    let head = tokens(hline, header)?;
    if head.len() != 2 {
        return Err(ParseError::new(hline, 1, "header must be `n l`"));
    }
    let (n, l) = (head[0].1, head[1].1);
    if l == 0 {
        return Err(ParseError::new(hline, head[1].0, "level must be positive"));
    }
    if n > 4096 {
        return Err(ParseError::new(hline, head[0].0, "matrix too large"));
    }
    let l = u32::try_from(l).map_err(|_| ParseError::new(hline, head[1].0, "level too large"))?;
    let n = n as usize;
    let mut exps = Vec::with_capacity(n * n);
    let mut last = hline;
    for _ in 0..n {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| ParseError::new(last + 1, 1, format!("expected {n} rows")))?;
        last = ln;
        let row = tokens(ln, line)?;
        if row.len() != n {
            return Err(ParseError::new(
                ln,
                1,
                format!("expected {n} entries, found {}", row.len()),
            ));
        }
        for (col, v) in row {
            if v >= l as u64 {
                return Err(ParseError::new(
                    ln,
                    col,
                    format!("exponent {v} not below {l}"),
                ));
            }
            exps.push(v as u32);
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(ParseError::new(ln, 1, "trailing data"));
    }
    ButsonMatrix::new(n, l, exps).map_err(|e| ParseError::new(hline, 1, e.to_string()))
}

/// Whitespace-separated unsigned integers with their 1-based columns.
fn tokens(ln: usize, line: &str) -> Result<Vec<(usize, u64)>, ParseError> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, c) in line
        .char_indices()
        .chain(std::iter::once((line.len(), ' ')))
    {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(k),
            (true, Some(s)) => {
                let col = line[..s].chars().count() + 1;
                let v = line[s..k].parse::<u64>().map_err(|_| {
                    ParseError::new(ln, col, format!("invalid integer {:?}", &line[s..k]))
                })?;
                out.push((col, v));
                start = None;
            }
            _ => {}
        }
    }
    Ok(out)
}

pub fn write_blog(m: &ButsonMatrix) -> String {
    let mut s = format!("{} {}\n", m.n(), m.level_bound());
    for i in 0..m.n() {
        let row: Vec<String> = m.row(i).iter().map(u32::to_string).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

#[derive(Serialize, Deserialize)]
struct CmatFile {
    n: usize,
    tol: f64,
    entries: Vec<Vec<[f64; 2]>>,
}

pub fn parse_cmat(text: &str) -> Result<ComplexHadamard, ParseError> {
    let file: CmatFile = serde_json::from_str(text)
        .map_err(|e| ParseError::new(e.line(), e.column(), e.to_string()))?;
    if file.entries.len() != file.n || file.entries.iter().any(|r| r.len() != file.n) {
        return Err(ParseError::new(
            1,
            1,
            format!("entries must be {0}x{0}", file.n),
        ));
    }
    let entries: Vec<Complex64> = file
        .entries
        .iter()
        .flatten()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    if entries
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(ParseError::new(1, 1, "non-finite entry"));
    }
    ComplexHadamard::new(file.n, entries, file.tol)
        .map_err(|e| ParseError::new(1, 1, e.to_string()))
}

pub fn write_cmat(m: &ComplexHadamard) -> String {
    let n = m.n();
    let file = CmatFile {
        n,
        tol: m.tol(),
        entries: (0..n)
            .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    };
    serde_json::to_string(&file).expect("plain data serialises")
}

/// Reads `.blog` or `.cmat` by extension; other extensions are sniffed.
pub fn read_matrix(path: &Path) -> Result<HadamardMatrix> {
    let text = fs::read_to_string(path)?;
    let json = match path.extension().and_then(|e| e.to_str()) {
        Some("cmat") => true,
        Some("blog") => false,
        _ => text.trim_start().starts_with('{'),
    };
    Ok(if json {
        parse_cmat(&text)?.into()
    } else {
        parse_blog(&text)?.into()
    })
}

/// Writes Butson matrices as `.blog` and complex ones as `.cmat`, unless the
/// extension asks for `.cmat` explicitly.
pub fn write_matrix(path: &Path, m: &HadamardMatrix) -> Result<()> {
    let want_json = path.extension().and_then(|e| e.to_str()) == Some("cmat");
    let text = match m {
        HadamardMatrix::Butson(b) if !want_json => write_blog(b),
        HadamardMatrix::Butson(b) => write_cmat(&b.to_complex()),
        HadamardMatrix::Complex(c) => write_cmat(c),
    };
    fs::write(path, text).map_err(Error::from)
}

/// Parses a parameter: `k/l` (the root `exp(2 pi i k / l)`), `re,im` (a
/// point on the unit circle) or `exp:theta` (`exp(i theta)`).
pub fn parse_phase(text: &str) -> Result<Phase, ParseError> {
    let t = text.trim();
    let err = |msg: String| ParseError::new(1, 1, msg);
    let float = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| err(format!("invalid number {s:?}")))
    };
    if let Some(theta) = t.strip_prefix("exp:") {
        return Ok(Phase::Unit(Complex64::from_polar(1.0, float(theta)?)));
    }
    if let Some((num, den)) = t.split_once('/') {
        let num: i64 = num
            .trim()
            .parse()
            .map_err(|_| err(format!("invalid numerator {num:?}")))?;
        let den: u32 = den
            .trim()
            .parse()
            .map_err(|_| err(format!("invalid denominator {den:?}")))?;
        if den == 0 {
            return Err(err("denominator must be positive".into()));
        }
        return Ok(Phase::root(num, den));
    }
    if let Some((re, im)) = t.split_once(',') {
        let z = Complex64::new(float(re)?, float(im)?);
        return Phase::unit(z).map_err(|e| err(e.to_string()));
    }
    match t {
        "1" => Ok(Phase::ONE),
        "-1" => Ok(Phase::root(1, 2)),
        _ => Err(err(format!("expected k/l, re,im or exp:theta, got {t:?}"))),
    }
}

/// Serialises in the natural format for the backend.
pub fn format_matrix(m: &HadamardMatrix) -> String {
    match m {
        HadamardMatrix::Butson(b) => write_blog(b),
        HadamardMatrix::Complex(c) => write_cmat(c),
    }
}

/// Parses either format, deciding by the first non-blank character.
pub fn parse_matrix(text: &str) -> Result<HadamardMatrix, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_cmat(text).map(Into::into)
    } else {
        parse_blog(text).map(Into::into)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::fourier;

    #[test]
    fn blog_round_trip() {
        let f = fourier(4);
        assert_eq!(parse_blog(&write_blog(&f)).unwrap(), f);
    }

    #[test]
    fn blog_errors_have_positions() {
        let e = parse_blog("2 2\n0 0\n0 x\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 3));
        let e = parse_blog("2 2\n0 0\n0 2\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 3));
        let e = parse_blog("2 2\n0 0\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(parse_blog("").is_err());
        assert!(parse_blog("1 0\n0\n").is_err());
    }

    #[test]
    fn cmat_round_trip_is_bit_exact() {
        let c = fourier(3).to_complex();
        let back = parse_cmat(&write_cmat(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn phase_syntax() {
        assert_eq!(parse_phase("1/4").unwrap(), Phase::root(1, 4));
        assert_eq!(parse_phase("-1/3").unwrap(), Phase::root(2, 3));
        assert_eq!(
            parse_phase("0,1").unwrap(),
            Phase::Unit(Complex64::new(0.0, 1.0))
        );
        let z = parse_phase("exp:0.5").unwrap().to_complex();
        assert!((z - Complex64::from_polar(1.0, 0.5)).norm() < 1e-15);
        assert_eq!(parse_phase("1").unwrap(), Phase::ONE);
        for bad in ["", "1/0", "2,0", "exp:x", "a/b", "nan,0", "q"] {
            assert!(parse_phase(bad).is_err(), "{bad}");
        }
        let p = Phase::Unit(Complex64::from_polar(1.0, 2.0));
        assert_eq!(parse_phase(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn cmat_shape_error() {
        let e = parse_cmat(r#"{"n":2,"tol":1e-9,"entries":[[[1,0]]]}"#).unwrap_err();
        assert!(e.message.contains("2x2"));
        assert!(parse_cmat("{").is_err());
    }
}
