//! Dense real matrices with a symmetry flag and a plain-text format.
//!
//! Text layout: a header line `rows cols` (optionally followed by `sym`),
//! then `rows` lines of whitespace-separated entries. Lines starting with
//! `#` are ignored. Values are written with 17 significant digits so a
//! write/read cycle reproduces every bit.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) type Mat = DMatrix<f64>;

/// Tolerance on |X_ij - X_ji| for the symmetric flag.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A validated dense matrix.
///
/// Rectangular matrices satisfy `rows <= cols`. Symmetric matrices are
/// square and symmetric within [`SYMMETRY_TOL`]. All entries are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    data: Mat,
    symmetric: bool,
}

impl Matrix {
    /// Builds a rectangular matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != rows * cols {
            return Err(Error::dim("entries", rows * cols, row_major.len()));
        }
        Self::from_dmatrix(Mat::from_row_slice(rows, cols, row_major))
    }

    /// Builds a symmetric matrix from row-major entries.
    pub fn symmetric(n: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != n * n {
            return Err(Error::dim("entries", n * n, row_major.len()));
        }
        Self::from_dmatrix_sym(Mat::from_row_slice(n, n, row_major))
    }

    pub fn from_dmatrix(data: Mat) -> Result<Self> {
        check_finite(&data)?;
        if data.nrows() > data.ncols() {
            return Err(Error::arg(format!(
                "rectangular matrices need rows <= cols, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Matrix {
            data,
            symmetric: false,
        })
    }

    pub fn from_dmatrix_sym(data: Mat) -> Result<Self> {
        check_finite(&data)?;
        if !data.is_square() {
            return Err(Error::arg(format!(
                "symmetric matrices must be square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let asym = max_asymmetry(&data);
        if asym > SYMMETRY_TOL {
            return Err(Error::arg(format!(
                "matrix flagged symmetric but |X - X^T| reaches {asym:.3e}"
            )));
        }
        Ok(Matrix {
            data,
            symmetric: true,
        })
    }

    /// Wraps a computed result, symmetrizing when requested.
    pub(crate) fn wrap(data: Mat, symmetric: bool) -> Self {
        if symmetric {
            Matrix {
                data: symmetrize(&data),
                symmetric: true,
            }
        } else {
            Matrix {
                data,
                symmetric: false,
            }
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            data: Mat::zeros(rows, cols),
            symmetric: false,
        }
    }

    pub fn zeros_sym(n: usize) -> Self {
        Matrix {
            data: Mat::zeros(n, n),
            symmetric: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix {
            data: Mat::identity(n, n),
            symmetric: true,
        }
    }

    /// Symmetric diagonal matrix.
    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = Mat::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            data[(i, i)] = *v;
        }
        check_finite(&data)?;
        Ok(Matrix {
            data,
            symmetric: true,
        })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.data[(i, j)]).collect())
            .collect()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.norm()
    }

    /// Trace inner product.
    pub fn inner(&self, other: &Matrix) -> f64 {
        self.data.dot(&other.data)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        same_shape(self, other, "operand")?;
        Ok(Matrix::wrap(
            &self.data - &other.data,
            self.symmetric && other.symmetric,
        ))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{} {}", self.rows(), self.cols());
        if self.symmetric {
            out.push_str(" sym");
        }
        out.push('\n');
        for i in 0..self.rows() {
            let line: Vec<String> = (0..self.cols())
                .map(|j| format!("{:.16e}", self.data[(i, j)]))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, 1, "missing header line"))?;
        let toks = tokens(header);
        if toks.len() < 2 || toks.len() > 3 {
            return Err(Error::parse(
                hline + 1,
                1,
                "header must be `rows cols` or `rows cols sym`",
            ));
        }
        let rows = parse_count(toks[0], hline)?;
        let cols = parse_count(toks[1], hline)?;
        let sym = match toks.get(2) {
            None => false,
            Some((_, "sym")) => true,
            Some((col, other)) => {
                return Err(Error::parse(
                    hline + 1,
                    *col,
                    format!("unexpected header token `{other}`"),
                ))
            }
        };
        let mut data = Mat::zeros(rows, cols);
        let mut last_line = hline + 1;
        for i in 0..rows {
            let (lno, line) = lines.next().ok_or_else(|| {
                Error::parse(last_line + 1, 1, format!("expected {rows} rows, found {i}"))
            })?;
            last_line = lno + 1;
            let toks = tokens(line);
            if toks.len() != cols {
                return Err(Error::parse(
                    lno + 1,
                    1,
                    format!("expected {cols} entries, found {}", toks.len()),
                ));
            }
            for (j, (col, tok)) in toks.iter().enumerate() {
                let v: f64 = tok.parse().map_err(|_| {
                    Error::parse(lno + 1, *col, format!("invalid number `{tok}`"))
                })?;
                if !v.is_finite() {
                    return Err(Error::parse(lno + 1, *col, "entry is not finite"));
                }
                data[(i, j)] = v;
            }
        }
        if let Some((lno, _)) = lines.next() {
            return Err(Error::parse(lno + 1, 1, "trailing content after matrix rows"));
        }
        if sym {
            Self::from_dmatrix_sym(data)
        } else {
            Self::from_dmatrix(data)
        }
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

impl serde::Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Matrix", 4)?;
        st.serialize_field("rows", &self.rows())?;
        st.serialize_field("cols", &self.cols())?;
        st.serialize_field("symmetric", &self.symmetric)?;
        st.serialize_field("data", &self.to_rows())?;
        st.end()
    }
}

impl AsRef<DMatrix<f64>> for Matrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.data
    }
}

pub(crate) fn same_shape(a: &Matrix, b: &Matrix, field: &str) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::dim(
            field,
            format!("{}x{}", a.rows(), a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
        ));
    }
    Ok(())
}

pub(crate) fn symmetrize(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

pub(crate) fn max_asymmetry(a: &Mat) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

fn check_finite(a: &Mat) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::arg("matrix has non-finite entries"))
    }
}

/// Splits a line into (1-based column, token) pairs.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (idx, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..idx]));
            }
        } else if start.is_none() {
            start = Some(idx);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_count((col, tok): (usize, &str), line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line + 1, col, format!("invalid dimension `{tok}`")))
}
