//! JSON matrix files, complex pair encoding and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::linalg::{qubits_for_dim, CMat, CVec};

/// On-disk matrix: qubit count plus `4^n` row-major entries as `[re, im]`.
#[derive(Debug, Deserialize)]
struct MatrixFile {
    n: usize,
    entries: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct MatrixOut {
    n: usize,
    entries: Box<RawValue>,
}

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn pairs(zs: &[Complex64]) -> Vec<[f64; 2]> {
    zs.iter().copied().map(pair).collect()
}

/// `serialize_with` hook writing a complex vector as `[[re, im], ...]`.
pub fn serialize_cvec<S: Serializer>(v: &CVec, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v.iter() {
        seq.serialize_element(&pair(*z))?;
    }
    seq.end()
}

/// `serialize_with` hook for a square matrix in the shared file layout.
pub fn serialize_cmat<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw = matrix_value(m).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

fn fmt_f64(x: f64) -> String {
    // 17 significant digits round-trip every finite double.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn entries_json(m: &CMat) -> String {
    let mut out = String::with_capacity(m.len() * 52 + 2);
    out.push('[');
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r + c > 0 {
                out.push(',');
            }
            let z = m[(r, c)];
            let _ = write!(out, "[{},{}]", fmt_f64(z.re), fmt_f64(z.im));
        }
    }
    out.push(']');
    out
}

fn matrix_value(m: &CMat) -> Result<Box<RawValue>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let n = qubits_for_dim(m.nrows())?;
    let out = MatrixOut {
        n,
        entries: RawValue::from_string(entries_json(m))?,
    };
    Ok(RawValue::from_string(serde_json::to_string(&out)?)?)
}

/// Encodes a `2^n x 2^n` matrix as `{"n": .., "entries": [[re, im], ...]}`.
pub fn matrix_to_json(m: &CMat) -> Result<String> {
    Ok(matrix_value(m)?.get().to_string())
}

/// Parses the shared matrix format, checking the entry count and finiteness.
pub fn matrix_from_json(text: &str, max_qubits: usize) -> Result<(usize, CMat)> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
    if file.n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    if file.n > max_qubits {
        return Err(Error::TooManyQubits { qubits: file.n, max: max_qubits });
    }
    let dim = 1usize << file.n;
    if file.entries.len() != dim * dim {
        return Err(Error::Input(format!(
            "n = {} needs {} entries, found {}",
            file.n,
            dim * dim,
            file.entries.len()
        )));
    }
    if file.entries.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Input("non-finite entry".into()));
    }
    let m = CMat::from_row_iterator(dim, dim, file.entries.iter().map(|[re, im]| Complex64::new(*re, *im)));
    Ok((file.n, m))
}

pub fn read_matrix(path: &Path, max_qubits: usize) -> Result<(usize, CMat)> {
    let text = fs::read_to_string(path)?;
    matrix_from_json(&text, max_qubits)
}

pub fn write_matrix(path: &Path, m: &CMat) -> Result<()> {
    let mut text = matrix_to_json(m)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Plain CSV table with a header row. Floats use the round-trip format.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    F(f64),
    U(usize),
    I(i64),
    B(bool),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::U(u) => u.to_string(),
            Cell::I(i) => i.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
        }
    }
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::DimensionMismatch { expected: self.header.len(), found: row.len() });
        }
        self.rows.push(row.iter().map(Cell::render).collect());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_special_unitary;

    #[test]
    fn matrix_round_trip_is_exact() {
        let u = random_special_unitary(8, 3).unwrap();
        let text = matrix_to_json(&u).unwrap();
        let (n, back) = matrix_from_json(&text, 12).unwrap();
        assert_eq!(n, 3);
        assert_eq!(back, u);
        assert_eq!(matrix_to_json(&back).unwrap(), text);
    }

    #[test]
    fn rejects_bad_entry_count() {
        let text = r#"{"n": 1, "entries": [[1,0],[0,0],[0,0]]}"#;
        assert!(matches!(matrix_from_json(text, 12), Err(Error::Input(_))));
        assert!(matrix_from_json("{", 12).is_err());
        let big = r#"{"n": 20, "entries": []}"#;
        assert!(matches!(matrix_from_json(big, 12), Err(Error::TooManyQubits { .. })));
    }

    #[test]
    fn csv_quotes_strings() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec![Cell::S("x,y".into()), Cell::F(0.5)]).unwrap();
        assert_eq!(t.render(), "a,b\n\"x,y\",5.0000000000000000e-1\n");
        assert!(t.push(vec![Cell::U(1)]).is_err());
    }
}
