//! Matrix files (headerless CSV and the binary SEBA1 format) and `key=value`
//! sidecars.
//!
//! SEBA1 layout: the six bytes `SEBA1\0`, little-endian `u64` rows and
//! cols, then `rows · cols` little-endian `f64` in column-major order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const SEBA1_MAGIC: &[u8; 6] = b"SEBA1\0";

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn encode_seba1(m: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(22 + 8 * m.as_slice().len());
    out.extend_from_slice(SEBA1_MAGIC);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_seba1(bytes: &[u8], path: &Path) -> Result<DenseMatrix> {
    if bytes.len() < 22 || &bytes[..6] != SEBA1_MAGIC {
        return Err(Error::parse(path, "not a SEBA1 file (bad magic)"));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
    let rows = word(6) as usize;
    let cols = word(14) as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::parse(path, "dimensions overflow"))?;
    let body = &bytes[22..];
    if body.len() != len * 8 {
        return Err(Error::parse(
            path,
            format!("expected {} data bytes for {rows}x{cols}, found {}", len * 8, body.len()),
        ));
    }
    let data: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    DenseMatrix::from_col_major(rows, cols, data)
}

pub fn encode_csv(m: &DenseMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                s.push(',');
            }
            s.push_str(&fmt_f64(m[(i, j)]));
        }
        s.push('\n');
    }
    s
}

pub fn decode_csv(text: &str, path: &Path) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                let f = f.trim();
                match f.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    Ok(_) => Err(Error::parse(path, format!("line {}: non-finite value '{f}'", ln + 1))),
                    Err(_) => Err(Error::parse(path, format!("line {}: cannot parse '{f}'", ln + 1))),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    path,
                    format!("line {}: {} fields, expected {}", ln + 1, row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, "empty matrix"));
    }
    DenseMatrix::from_rows(&rows)
}

/// Reads a matrix, recognising SEBA1 by its magic bytes and treating
/// anything else as CSV.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(SEBA1_MAGIC) {
        decode_seba1(&bytes, path)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::parse(path, "not UTF-8 text"))?;
        decode_csv(&text, path)
    }
}

/// Writes SEBA1 when the extension is `.seba1`, CSV otherwise.
pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let bytes = if path.extension().is_some_and(|e| e == "seba1") {
        encode_seba1(m)
    } else {
        encode_csv(m).into_bytes()
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a vector stored as one column or one row.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let m = read_matrix(path)?;
    if m.cols() == 1 || m.rows() == 1 {
        Ok(m.into_vec())
    } else {
        Err(Error::parse(path, format!("expected a vector, found a {}x{} matrix", m.rows(), m.cols())))
    }
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let m = DenseMatrix::from_col_major(v.len(), 1, v.to_vec())?;
    write_matrix(path, &m)
}

/// Ordered `key=value` pairs.
pub type KeyValues = Vec<(String, String)>;

pub fn encode_kv(pairs: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

/// Parses `key=value` lines; blank lines and `#` comments are ignored.
pub fn decode_kv(text: &str, path: &Path) -> Result<KeyValues> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, format!("line {}: expected key=value", ln + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::parse(path, format!("line {}: empty key", ln + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_kv(path: impl AsRef<Path>) -> Result<KeyValues> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_kv(&text, path)
}

pub fn write_kv(path: impl AsRef<Path>, pairs: &[(String, String)]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_kv(pairs)).map_err(|e| Error::io(path, e))
}

/// Writes text, mapping failures to an I/O error naming the path.
pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
