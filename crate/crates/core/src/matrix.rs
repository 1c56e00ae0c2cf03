//! Dense and masked matrix containers with the Frobenius-space primitives
//! used by every solver in this crate.
//!
//! Values are immutable after construction and every reduction runs in a
//! fixed row-major order, so results are bit-reproducible across runs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major dense real matrix. Construction rejects NaN/Inf entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch("DenseMatrix::from_vec"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("DenseMatrix::from_vec"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("DenseMatrix::from_rows"));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Internal constructor for values produced by arithmetic on already
    /// validated inputs.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    /// Frobenius norm; summation in row-major order.
    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    pub fn fro_norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for v in &self.data {
            acc += v * v;
        }
        acc
    }

    /// Frobenius inner product `<self, other>`.
    pub fn fro_inner(&self, other: &DenseMatrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch("fro_inner"));
        }
        let mut acc = 0.0;
        for (a, b) in self.data.iter().zip(&other.data) {
            acc += a * b;
        }
        Ok(acc)
    }

    /// Matrix product `self * other` with a fixed inner-loop accumulation
    /// order.
    pub fn gemm(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch("gemm"));
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += self.data[i * k + l] * other.data[l * n + j];
                }
                out[i * n + j] = acc;
            }
        }
        Ok(DenseMatrix::from_raw(m, n, out))
    }

    /// `self * other^T`.
    pub fn gemm_nt(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch("gemm_nt"));
        }
        let (m, k, n) = (self.rows, self.cols, other.rows);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += self.data[i * k + l] * other.data[j * k + l];
                }
                out[i * n + j] = acc;
            }
        }
        Ok(DenseMatrix::from_raw(m, n, out))
    }

    /// `self^T * other`.
    pub fn gemm_tn(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch("gemm_tn"));
        }
        let (m, k, n) = (self.cols, self.rows, other.cols);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += self.data[l * m + i] * other.data[l * n + j];
                }
                out[i * n + j] = acc;
            }
        }
        Ok(DenseMatrix::from_raw(m, n, out))
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        DenseMatrix::from_raw(self.cols, self.rows, out)
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        let data = self.data.iter().map(|v| v * s).collect();
        DenseMatrix::from_raw(self.rows, self.cols, data)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a + b, "add")
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a - b, "sub")
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a + s * b, "add_scaled")
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let data = self.data.iter().map(|&v| f(v)).collect();
        DenseMatrix::from_raw(self.rows, self.cols, data)
    }

    fn zip_with(
        &self,
        other: &DenseMatrix,
        f: impl Fn(f64, f64) -> f64,
        ctx: &'static str,
    ) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(ctx));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(DenseMatrix::from_raw(self.rows, self.cols, data))
    }

    /// Serialize as comma-separated rows, '.' decimal point, no header.
    /// Values print with the shortest representation that parses back to the
    /// same f64, so a write/read round trip is bit-exact.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.data[i * self.cols + j]);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad number {field:?}"),
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse { line: 1, message: "empty matrix file".into() });
        }
        Self::from_rows(&rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }
}

/// The iterate (U, Z) with U of shape M x K and Z of shape K x N.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub u: DenseMatrix,
    pub z: DenseMatrix,
}

impl FactorPair {
    pub fn new(u: DenseMatrix, z: DenseMatrix) -> Result<Self> {
        if u.cols() != z.rows() {
            return Err(Error::ShapeMismatch("FactorPair::new"));
        }
        Ok(FactorPair { u, z })
    }

    pub fn zeros(m: usize, n: usize, k: usize) -> Self {
        FactorPair { u: DenseMatrix::zeros(m, k), z: DenseMatrix::zeros(k, n) }
    }

    pub fn inner_dim(&self) -> usize {
        self.u.cols()
    }

    /// `||U||_F^2 + ||Z||_F^2`.
    pub fn fro_norm_sq(&self) -> f64 {
        self.u.fro_norm_sq() + self.z.fro_norm_sq()
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    pub fn fro_inner(&self, other: &FactorPair) -> Result<f64> {
        Ok(self.u.fro_inner(&other.u)? + self.z.fro_inner(&other.z)?)
    }

    pub fn sub(&self, other: &FactorPair) -> Result<FactorPair> {
        Ok(FactorPair { u: self.u.sub(&other.u)?, z: self.z.sub(&other.z)? })
    }

    /// `self + s * other`, blockwise.
    pub fn add_scaled(&self, s: f64, other: &FactorPair) -> Result<FactorPair> {
        Ok(FactorPair {
            u: self.u.add_scaled(s, &other.u)?,
            z: self.z.add_scaled(s, &other.z)?,
        })
    }

    pub fn scale(&self, s: f64) -> FactorPair {
        FactorPair { u: self.u.scale(s), z: self.z.scale(s) }
    }

    /// The product UZ.
    pub fn product(&self) -> DenseMatrix {
        self.u.gemm(&self.z).expect("inner dimensions agree by construction")
    }
}

/// Sparse matrix as a sorted list of (row, col, value) triples, unique per
/// index pair. This is the observation set Omega of the completion problems.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl MaskedMatrix {
    /// Entries are sorted row-major on construction so iteration order (and
    /// therefore every reduction over the mask) is canonical.
    pub fn from_triples(
        rows: usize,
        cols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(i, j, v) in &entries {
            if i >= rows || j >= cols {
                return Err(Error::InvalidInput(format!(
                    "masked entry ({i}, {j}) out of range for {rows}x{cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("MaskedMatrix::from_triples"));
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::InvalidInput(format!(
                    "duplicate masked entry at ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        Ok(MaskedMatrix { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// `||P_Omega(A)||_F` over the stored values.
    pub fn values_fro_norm(&self) -> f64 {
        let mut acc = 0.0;
        for &(_, _, v) in &self.entries {
            acc += v * v;
        }
        acc.sqrt()
    }

    pub fn min_max_value(&self) -> Option<(f64, f64)> {
        let mut it = self.entries.iter().map(|&(_, _, v)| v);
        let first = it.next()?;
        let mut lo = first;
        let mut hi = first;
        for v in it {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Some((lo, hi))
    }

    /// File representation: a `rows,cols` shape line followed by one
    /// `row,col,value` line per entry. Value formatting round-trips f64
    /// bit-exactly.
    pub fn to_triples_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{},{}", self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            let _ = writeln!(out, "{i},{j},{v}");
        }
        out
    }

    pub fn from_triples_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 1, message: "empty triples file".into() })?;
        let dims: Vec<&str> = header.split(',').collect();
        if dims.len() != 2 {
            return Err(Error::Parse { line: 1, message: "expected rows,cols".into() });
        }
        let rows = parse_field::<usize>(dims[0], 1)?;
        let cols = parse_field::<usize>(dims[1], 1)?;
        let mut entries = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "expected row,col,value".into(),
                });
            }
            entries.push((
                parse_field::<usize>(fields[0], lineno + 1)?,
                parse_field::<usize>(fields[1], lineno + 1)?,
                parse_field::<f64>(fields[2], lineno + 1)?,
            ));
        }
        Self::from_triples(rows, cols, entries)
    }

    pub fn write_triples(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_triples_string())?;
        Ok(())
    }

    pub fn read_triples(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_triples_str(&text)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse { line, message: format!("bad field {s:?}") })
}
