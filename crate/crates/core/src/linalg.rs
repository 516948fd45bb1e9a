//! Dense kernels shared across modules: sorted factorizations, null spaces,
//! orthonormalization.

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::Mat;

const MAX_SWEEPS: usize = 20_000;

fn to_faer(a: &Mat) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn svd_failed(what: &str) -> Error {
    Error::NonConvergence {
        what: what.into(),
        iterations: 0,
        residual: f64::NAN,
    }
}

/// Thin SVD with singular values sorted nonincreasing.
///
/// Returns `(U, sigma, V)` with `U: rows x k`, `V: cols x k`, `k = min(rows, cols)`.
pub(crate) fn svd(a: &Mat) -> Result<(Mat, Vec<f64>, Mat)> {
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok((Mat::zeros(rows, 0), Vec::new(), Mat::zeros(cols, 0)));
    }
    // nalgebra's bidiagonal SVD returns inconsistent factors on some
    // rank-deficient inputs, so the factorization goes through faer.
    let dec = to_faer(a)
        .thin_svd()
        .map_err(|_| svd_failed("singular value decomposition"))?;
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
    let uu = Mat::from_fn(rows, k, |i, c| u[(i, order[c])]);
    let vv = Mat::from_fn(cols, k, |i, c| v[(i, order[c])]);
    let ss = order.iter().map(|&c| s[c].max(0.0)).collect();
    Ok((uu, ss, vv))
}

/// Singular values only, sorted nonincreasing.
pub(crate) fn singular_values(a: &Mat) -> Result<Vec<f64>> {
    if a.nrows().min(a.ncols()) == 0 {
        return Ok(Vec::new());
    }
    let mut s: Vec<f64> = to_faer(a)
        .singular_values()
        .map_err(|_| svd_failed("singular values"))?
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Symmetric eigendecomposition with eigenvalues sorted nonincreasing.
pub(crate) fn eig(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let dec = SymmetricEigen::try_new(a.clone(), f64::EPSILON, MAX_SWEEPS).ok_or_else(|| {
        Error::NonConvergence {
            what: "symmetric eigendecomposition".into(),
            iterations: MAX_SWEEPS,
            residual: f64::NAN,
        }
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        dec.eigenvalues[j]
            .total_cmp(&dec.eigenvalues[i])
            .then(i.cmp(&j))
    });
    let mut p = Mat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        p.set_column(dst, &dec.eigenvectors.column(src));
        vals.push(dec.eigenvalues[src]);
    }
    Ok((vals, p))
}

/// `U diag(d) V^T` for the leading `d.len()` columns.
pub(crate) fn recompose(u: &Mat, d: &[f64], v: &Mat) -> Mat {
    let mut out = Mat::zeros(u.nrows(), v.nrows());
    for (i, &di) in d.iter().enumerate() {
        if di != 0.0 {
            out += u.column(i) * v.column(i).transpose() * di;
        }
    }
    out
}

/// Orthonormal basis of the kernel of `a` (as columns).
///
/// A singular value counts as zero when it is at most `rel_tol * max(1, sigma_1)`.
pub(crate) fn null_space(a: &Mat, rel_tol: f64) -> Result<Mat> {
    let (p, q) = a.shape();
    if q == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    // Padding with zero rows keeps the kernel and makes V square.
    let padded = if p < q {
        let mut m = Mat::zeros(q, q);
        m.view_mut((0, 0), (p, q)).copy_from(a);
        m
    } else {
        a.clone()
    };
    let (_, s, v) = svd(&padded)?;
    let cut = rel_tol * s.first().copied().unwrap_or(0.0).max(1.0);
    let idx: Vec<usize> = (0..q).filter(|&i| s[i] <= cut).collect();
    let mut out = Mat::zeros(q, idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        out.set_column(dst, &v.column(src));
    }
    Ok(out)
}

/// Orthonormal basis for the span of the columns of `a`.
pub(crate) fn orthonormalize(a: &Mat, rel_tol: f64) -> Result<Mat> {
    if a.ncols() == 0 {
        return Ok(Mat::zeros(a.nrows(), 0));
    }
    let (u, s, _) = svd(a)?;
    let cut = rel_tol * s.first().copied().unwrap_or(0.0).max(1.0);
    let keep = s.iter().filter(|&&v| v > cut).count();
    Ok(u.columns(0, keep).into_owned())
}

/// Column-major vectorization.
pub(crate) fn vec_of(a: &Mat) -> DVector<f64> {
    DVector::from_column_slice(a.as_slice())
}

pub(crate) fn unvec(v: &[f64], rows: usize, cols: usize) -> Mat {
    Mat::from_column_slice(rows, cols, v)
}

pub(crate) fn spectral_norm(a: &Mat) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub(crate) fn nuclear_norm(a: &Mat) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_eig(a: &Mat) -> Result<f64> {
    Ok(eig(a)?.0.last().copied().unwrap_or(0.0))
}

/// Projection of a symmetric matrix onto the PSD cone.
pub(crate) fn psd_part(a: &Mat) -> Result<Mat> {
    let (vals, p) = eig(a)?;
    let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    Ok(crate::matrix::symmetrize(&recompose(&p, &clipped, &p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_reconstructs_rank_deficient_input() {
        let a = Mat::from_column_slice(
            2,
            2,
            &[-0.016684991857945003, -0.9286692465636436, -0.0448546379464942, -2.4965623706205515],
        );
        let (u, s, v) = svd(&a).unwrap();
        assert!((recompose(&u, &s, &v) - &a).norm() <= 1e-14 * a.norm());
        assert!((s[0] - a.norm()).abs() <= 1e-14);
    }

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let a = Mat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 4.0]);
        let (u, s, v) = svd(&a).unwrap();
        assert!(s[0] >= s[1]);
        assert!((recompose(&u, &s, &v) - &a).norm() < 1e-12);
        assert!((u.transpose() * &u - Mat::identity(2, 2)).norm() < 1e-12);
        assert!((v.transpose() * &v - Mat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = Mat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = null_space(&a, 1e-10).unwrap();
        assert_eq!(n.ncols(), 2);
        assert!((&a * &n).norm() < 1e-12);
    }

    #[test]
    fn orthonormalize_drops_dependent_columns() {
        let a = Mat::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0]);
        let q = orthonormalize(&a, 1e-10).unwrap();
        assert_eq!(q.ncols(), 2);
    }

    #[test]
    fn eig_sorted_descending() {
        let a = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let (vals, p) = eig(&a).unwrap();
        assert_eq!(vals, vec![3.0, 1.0]);
        assert!((p[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }
}
