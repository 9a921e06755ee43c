//! On-disk formats: CSV tables and the binary matrix layouts.
//!
//! Binary layouts share a 16-byte little-endian header:
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 0..4  | magic, `KSH1` (matrix) or `KSB1` (basis) |
//! | 4..8  | `u32` dimension `N`                      |
//! | 8..12 | `u32` row count (`N` for `KSH1`, `K` for `KSB1`) |
//! | 12..16| `u32` flags, bit 0 set when values are complex |
//!
//! `KSH1` then stores the lower triangle row by row (`H[0][0]`, `H[1][0]`,
//! `H[1][1]`, ...) as `f64`. `KSB1` stores `K` Krylov vectors of length `N`, as
//! `f64` pairs `(re, im)` when complex and plain `f64` otherwise.

use num_complex::Complex64;
use spread_core::analysis::Histogram;
use spread_core::tridiag::KrylovBasis;
use spread_core::{LanczosCoefficients, SpreadComplexitySeries, SymMatrix};

pub const MATRIX_MAGIC: [u8; 4] = *b"KSH1";
pub const BASIS_MAGIC: [u8; 4] = *b"KSB1";
pub const HEADER_LEN: usize = 16;
const COMPLEX: u32 = 1;

/// Shortest string that parses back to the same bits: plain decimals for
/// moderate magnitudes, exponent form otherwise.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Rows of string fields as CSV.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// `n,a_n,b_n`, with `b_0` written as 0.
pub fn coeffs_csv(lc: &LanczosCoefficients) -> Vec<u8> {
    csv_table(&["n", "a_n", "b_n"], lc.rows().map(|(n, a, b)| vec![n.to_string(), num(a), num(b)]))
}

/// `t,C,F`.
pub fn series_csv(s: &SpreadComplexitySeries) -> Vec<u8> {
    series_columns(&s.times, &s.c, &s.f)
}

pub fn series_columns(t: &[f64], c: &[f64], f: &[f64]) -> Vec<u8> {
    csv_table(&["t", "C", "F"], t.iter().zip(c).zip(f).map(|((t, c), f)| vec![num(*t), num(*c), num(*f)]))
}

/// `bin_lo,bin_hi,count`.
pub fn histogram_csv(h: &Histogram) -> Vec<u8> {
    csv_table(&["bin_lo", "bin_hi", "count"], h.rows().map(|(lo, hi, c)| vec![num(lo), num(hi), c.to_string()]))
}

fn header(magic: [u8; 4], dim: usize, rows: usize, flags: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&flags.to_le_bytes());
    out
}

pub fn matrix_binary(h: &SymMatrix) -> Vec<u8> {
    let n = h.dim();
    let mut out = header(MATRIX_MAGIC, n, n, 0);
    out.reserve(8 * n * (n + 1) / 2);
    for x in h.lower_triangle() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

/// Full matrix as CSV without a header, for small instances.
pub fn matrix_csv(h: &SymMatrix) -> Vec<u8> {
    let n = h.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    for i in 0..n {
        w.write_record((0..n).map(|j| num(h.get(i, j)))).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn basis_binary(basis: &KrylovBasis) -> Vec<u8> {
    let complex = basis.vectors.iter().flatten().any(|z| z.im != 0.0);
    let mut out = header(BASIS_MAGIC, basis.dim, basis.vectors.len(), if complex { COMPLEX } else { 0 });
    for z in basis.vectors.iter().flatten() {
        out.extend_from_slice(&z.re.to_le_bytes());
        if complex {
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn read_header(bytes: &[u8], magic: [u8; 4]) -> Result<(usize, usize, u32), String> {
    if bytes.len() < HEADER_LEN || bytes[..4] != magic {
        return Err(format!("missing {} header", String::from_utf8_lossy(&magic)));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    Ok((word(4) as usize, word(8) as usize, word(12)))
}

fn read_f64s(bytes: &[u8], count: usize) -> Result<Vec<f64>, String> {
    if bytes.len() != 8 * count {
        return Err(format!("expected {} payload bytes, found {}", 8 * count, bytes.len()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

pub fn read_matrix_binary(bytes: &[u8]) -> Result<SymMatrix, String> {
    let (n, _, _) = read_header(bytes, MATRIX_MAGIC)?;
    let lower = read_f64s(&bytes[HEADER_LEN..], n * (n + 1) / 2)?;
    let mut it = lower.into_iter();
    SymMatrix::from_lower(n, |_, _| it.next().expect("length checked")).map_err(|e| e.to_string())
}

pub fn read_basis_binary(bytes: &[u8]) -> Result<KrylovBasis, String> {
    let (dim, rows, flags) = read_header(bytes, BASIS_MAGIC)?;
    let complex = flags & COMPLEX != 0;
    let per = if complex { 2 } else { 1 };
    let vals = read_f64s(&bytes[HEADER_LEN..], rows * dim * per)?;
    let vectors = vals
        .chunks_exact(dim.max(1) * per)
        .map(|row| {
            if complex {
                row.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
            } else {
                row.iter().map(|&x| Complex64::new(x, 0.0)).collect()
            }
        })
        .collect();
    Ok(KrylovBasis { dim, vectors })
}

/// A CSV file as named `f64` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(bytes: &[u8]) -> Result<Self, String> {
        let mut r = csv::Reader::from_reader(bytes);
        let header: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(str::to_owned).collect();
        let mut columns = vec![Vec::new(); header.len()];
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            for (col, field) in columns.iter_mut().zip(rec.iter()) {
                // line 1 is the header
                col.push(field.trim().parse().map_err(|e| format!("line {}: \"{field}\": {e}", line + 2))?);
            }
        }
        Ok(Table { header, columns })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header.iter().position(|h| h == name).map(|i| self.columns[i].as_slice())
    }
}
