//! Plain-text matrices: a `k n` header line followed by `k` rows of `n`
//! whitespace-separated decimal numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use l1cert_core::gen::GenSpec;
use l1cert_core::SensingMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct FormatError(pub String);

impl std::fmt::Display for FormatError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for FormatError {}

fn bad(msg: impl Into<String>) -> FormatError {
    FormatError(msg.into())
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, FormatError> {
    tok.parse::<f64>().map_err(|_| bad(format!("line {line}: `{tok}` is not a number")))
}

/// Parses a matrix, returning `(k, n, row-major entries)`.
pub fn parse_matrix(text: &str) -> Result<(usize, usize, Vec<f64>), FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad("empty matrix file"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let [k, n] = dims[..] else {
        return Err(bad("line 1: expected `k n`"));
    };
    let k: usize = k.parse().map_err(|_| bad("line 1: k is not a nonnegative integer"))?;
    let n: usize = n.parse().map_err(|_| bad("line 1: n is not a nonnegative integer"))?;
    let mut entries = Vec::with_capacity(k * n);
    let mut rows = 0;
    for (idx, line) in lines {
        let before = entries.len();
        for tok in line.split_whitespace() {
            entries.push(parse_f64(tok, idx + 1)?);
        }
        if entries.len() - before != n {
            return Err(bad(format!("line {}: expected {n} entries, found {}", idx + 1, entries.len() - before)));
        }
        rows += 1;
    }
    if rows != k {
        return Err(bad(format!("expected {k} rows, found {rows}")));
    }
    Ok((k, n, entries))
}

/// Formats a `k x n` matrix given entry-wise; numbers round-trip exactly.
pub fn format_matrix(k: usize, n: usize, entry: impl Fn(usize, usize) -> f64) -> String {
    let mut out = format!("{k} {n}\n");
    for i in 0..k {
        for j in 0..n {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{}", entry(i, j)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn format_sensing_matrix(a: &SensingMatrix) -> String {
    format_matrix(a.k(), a.n(), |i, j| a.get(i, j))
}

/// Whitespace-separated numbers in any layout.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, FormatError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            out.push(parse_f64(tok, idx + 1)?);
        }
    }
    Ok(out)
}

pub fn format_vector(v: &[f64]) -> String {
    let mut out = String::new();
    for x in v {
        writeln!(out, "{x}").unwrap();
    }
    out
}

/// Metadata written next to a generated matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    #[serde(flatten)]
    pub spec: GenSpec,
}

pub fn sidecar_path(matrix: &Path) -> PathBuf {
    let mut p = matrix.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))
}

/// Reads a matrix file; the seed is taken from its sidecar when present.
pub fn read_matrix(path: &Path) -> Result<SensingMatrix, FormatError> {
    let (k, n, entries) = parse_matrix(&read_text(path)?).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let a = SensingMatrix::from_row_major(k, n, &entries).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    Ok(match read_sidecar(path) {
        Some(sc) => a.with_seed(sc.spec.seed),
        None => a,
    })
}

pub fn read_sidecar(matrix: &Path) -> Option<Sidecar> {
    let text = fs::read_to_string(sidecar_path(matrix)).ok()?;
    serde_json::from_str(&text).ok()
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>, FormatError> {
    parse_vector(&read_text(path)?).map_err(|e| bad(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = format_matrix(2, 3, |i, j| (i * 3 + j) as f64 / 7.0 - 0.3);
        let (k, n, v) = parse_matrix(&text).unwrap();
        assert_eq!((k, n), (2, 3));
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(v[i * 3 + j], (i * 3 + j) as f64 / 7.0 - 0.3);
            }
        }
    }

    #[test]
    fn rejects_malformed() {
        for t in ["", "2\n1 2", "1 2\n1", "2 2\n1 2\n", "1 2\n1 x", "1 1\n1\n2"] {
            assert!(parse_matrix(t).is_err(), "{t:?}");
        }
        assert_eq!(parse_matrix("1 2\n\n1e-3  -2\n").unwrap().2, vec![1e-3, -2.0]);
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("1 2\n3\n").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_vector(&format_vector(&[0.1, -2.5])).unwrap(), vec![0.1, -2.5]);
    }
}
