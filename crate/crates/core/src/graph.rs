//! Graph Laplacians L = D − A from MatrixMarket coordinate files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{Mat, Matrix};
use crate::sets::io::MatrixMarket;

/// Weighted adjacency. Pattern entries weigh 1; self-loops are dropped
/// since they cancel in D − A.
pub fn parse_adjacency(text: &str) -> Result<Matrix> {
    let mm = MatrixMarket::parse(text)?;
    if mm.rows != mm.cols {
        return Err(Error::parse(
            2,
            1,
            format!("adjacency must be square, got {}x{}", mm.rows, mm.cols),
        ));
    }
    let n = mm.rows;
    let mut a = Mat::zeros(n, n);
    let mut seen = vec![None; n * n];
    for &(i, j, w, line) in &mm.entries {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::parse(
                line,
                1,
                format!("edge weight must be finite and nonnegative, got {w}"),
            ));
        }
        if let Some(first) = seen[i * n + j].replace(line) {
            return Err(Error::parse(
                line,
                1,
                format!("entry ({}, {}) repeats line {first}", i + 1, j + 1),
            ));
        }
        if i != j {
            a[(i, j)] = w;
            if mm.symmetric {
                a[(j, i)] = w;
            }
        }
    }
    if !mm.symmetric {
        for &(i, j, w, line) in &mm.entries {
            if a[(j, i)] != w && i != j {
                return Err(Error::parse(
                    line,
                    1,
                    format!(
                        "entry ({}, {}) = {w} differs from its transpose {}",
                        i + 1,
                        j + 1,
                        a[(j, i)]
                    ),
                ));
            }
        }
    }
    Ok(Matrix::wrap(a, true))
}

pub fn laplacian(adjacency: &Matrix) -> Result<Matrix> {
    if !adjacency.is_symmetric() {
        return Err(Error::arg("adjacency must be symmetric"));
    }
    let a = adjacency.as_dmatrix();
    let n = a.nrows();
    let mut l = -a.clone();
    for i in 0..n {
        l[(i, i)] = (0..n).filter(|&j| j != i).map(|j| a[(i, j)]).sum();
    }
    Ok(Matrix::wrap(l, true))
}

pub fn parse_graph(text: &str) -> Result<Matrix> {
    laplacian(&parse_adjacency(text)?)
}

pub fn ingest_graph(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text).map_err(|e| match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn single_edge() {
        let l = parse_graph("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 1.0\n").unwrap();
        assert_eq!(l.to_row_major(), vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn triangle_spectrum() {
        let text = "%%MatrixMarket matrix coordinate pattern symmetric\n% triangle\n3 3 3\n2 1\n3 1\n3 2\n";
        let l = parse_graph(text).unwrap();
        let (vals, _) = linalg::eig(l.as_dmatrix()).unwrap();
        for (v, want) in vals.iter().zip([3.0, 3.0, 0.0]) {
            assert!((v - want).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_graph() {
        let l = parse_graph("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 0\n").unwrap();
        assert_eq!(l.fro_norm(), 0.0);
    }

    #[test]
    fn general_needs_symmetric_entries() {
        let ok = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 2.5\n2 1 2.5\n";
        assert_eq!(parse_graph(ok).unwrap().get(0, 1), -2.5);
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 2.5\n2 1 1.0\n";
        match parse_graph(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn located_errors() {
        let cases = [
            ("%%MatrixMarket matrix array real general\n", 1, 1),
            ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 x 1\n", 3, 3),
            ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1\n", 3, 1),
            ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 -1\n", 3, 1),
            ("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n2 1 1\n", 4, 1),
        ];
        for (text, want_line, want_col) in cases {
            match parse_graph(text) {
                Err(Error::Parse { line, column, .. }) => {
                    assert_eq!((line, column), (want_line, want_col), "{text}")
                }
                other => panic!("{other:?}"),
            }
        }
    }
}
