//! Report and table writers. Floats are written with 17 significant digits
//! (`{:.16e}`) so every value reads back bit-for-bit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gradmap::{AElement, FieldKind, PElement, C64};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{CliError, CliResult};

/// A float serialized with 17 significant digits; non-finite values become
/// `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn f17s(xs: &[f64]) -> Vec<F17> {
    xs.iter().copied().map(F17).collect()
}

/// A matrix as rows of reals (real model) or rows of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Real(Vec<Vec<F17>>),
    Complex(Vec<Vec<[F17; 2]>>),
}

impl MatrixJson {
    pub fn from_entries(kind: FieldKind, rows: usize, cols: usize, at: impl Fn(usize, usize) -> C64) -> Self {
        match kind {
            FieldKind::Real => {
                MatrixJson::Real((0..rows).map(|r| (0..cols).map(|c| F17(at(r, c).re)).collect()).collect())
            }
            FieldKind::Complex => MatrixJson::Complex(
                (0..rows).map(|r| (0..cols).map(|c| at(r, c)).map(|z| [F17(z.re), F17(z.im)]).collect()).collect(),
            ),
        }
    }

    pub fn from_p(kind: FieldKind, p: &PElement) -> Self {
        let m = p.matrix();
        Self::from_entries(kind, m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

pub fn a_json(a: &AElement) -> Vec<F17> {
    f17s(a.as_slice())
}

/// A CSV table preceded by `#` comment lines that document the columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(comments: &[&str], header: Vec<String>) -> Self {
        Self { comments: comments.iter().map(|s| s.to_string()).collect(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut out = Vec::new();
        for line in &self.comments {
            writeln!(out, "# {line}").expect("writing to memory");
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
    }
}

/// Numbered columns `prefix_0 … prefix_{n-1}`.
pub fn indexed_columns(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}_{i}")).collect()
}

pub fn report_bytes<T: Serialize>(report: &T) -> CliResult<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(report).map_err(|source| CliError::Json { path: "<report>".into(), source })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Where output goes: an explicit path (relative paths are resolved against
/// `out_dir` when given), `out_dir/<default_name>`, or standard output.
pub fn resolve_output(explicit: Option<&Path>, out_dir: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    match (explicit, out_dir) {
        (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(dir)) => Some(dir.join(default_name)),
        (None, None) => None,
    }
}

pub fn write_output(target: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match target {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            fs::write(path, bytes).map_err(|e| CliError::io(path, e))
        }
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::io("<stdout>", e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f17_round_trips_bits() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, -0.0, f64::MIN_POSITIVE] {
            let json = serde_json::to_string(&F17(x)).unwrap();
            let back: f64 = serde_json::from_str(&json).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{json}");
        }
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(serde_json::to_string(&F17(f64::NAN)).unwrap(), "null");
        assert_eq!(serde_json::to_string(&F17(f64::INFINITY)).unwrap(), "null");
    }

    #[test]
    fn csv_has_comment_header() {
        let mut t = CsvTable::new(&["residual per iteration"], vec!["iteration".into(), "residual".into()]);
        t.push(vec!["0".into(), fmt17(0.5)]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "# residual per iteration\niteration,residual\n0,5.0000000000000000e-1\n");
    }

    #[test]
    fn output_resolution() {
        let dir = Path::new("/tmp/out");
        assert_eq!(resolve_output(Some(Path::new("r.json")), Some(dir), "x"), Some(dir.join("r.json")));
        assert_eq!(resolve_output(Some(Path::new("/abs.json")), Some(dir), "x"), Some(PathBuf::from("/abs.json")));
        assert_eq!(resolve_output(None, Some(dir), "x.json"), Some(dir.join("x.json")));
        assert_eq!(resolve_output(None, None, "x.json"), None);
    }
}
