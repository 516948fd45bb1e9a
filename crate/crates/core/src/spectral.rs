//! Spectral decompositions, Ky-Fan norms, the rank residuals θ_r and η_r,
//! Schatten tails and the subgradients used to linearize them.
//!
//! Singular values are always sorted nonincreasing and indexed from 1 in
//! the documentation (σ_1 ≥ σ_2 ≥ ...), from 0 in code.

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{Mat, Matrix};

/// Default relative threshold for [`numeric_rank`].
pub const DEFAULT_RANK_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompMode {
    Svd,
    Eig,
}

/// `X = U diag(values) V^T` (svd) or `X = P diag(values) P^T` (eig).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    mode: DecompMode,
    left: Mat,
    values: Vec<f64>,
    right: Option<Mat>,
    symmetric: bool,
}

impl SpectralDecomposition {
    pub fn mode(&self) -> DecompMode {
        self.mode
    }

    pub fn left(&self) -> &Mat {
        &self.left
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right factors; `None` in eig mode.
    pub fn right(&self) -> Option<&Mat> {
        self.right.as_ref()
    }

    pub fn reconstruct(&self) -> Matrix {
        let right = self.right.as_ref().unwrap_or(&self.left);
        Matrix::wrap(
            linalg::recompose(&self.left, &self.values, right),
            self.symmetric,
        )
    }

    fn require_svd(&self) -> Result<&Mat> {
        match (&self.mode, &self.right) {
            (DecompMode::Svd, Some(v)) => Ok(v),
            _ => Err(Error::arg("subgradients need an svd-mode decomposition")),
        }
    }
}

pub fn decompose(x: &Matrix, mode: DecompMode) -> Result<SpectralDecomposition> {
    match mode {
        DecompMode::Svd => {
            let (u, s, v) = linalg::svd(x.as_dmatrix())?;
            Ok(SpectralDecomposition {
                mode,
                left: u,
                values: s,
                right: Some(v),
                symmetric: x.is_symmetric(),
            })
        }
        DecompMode::Eig => {
            if !x.is_symmetric() {
                return Err(Error::arg("eig mode requires a symmetric matrix"));
            }
            let (vals, p) = linalg::eig(x.as_dmatrix())?;
            Ok(SpectralDecomposition {
                mode,
                left: p,
                values: vals,
                right: None,
                symmetric: true,
            })
        }
    }
}

/// Singular values sorted nonincreasing.
pub fn singular_values(x: &Matrix) -> Result<Vec<f64>> {
    linalg::singular_values(x.as_dmatrix())
}

fn check_rank_index(r: usize, rows: usize) -> Result<()> {
    if r == 0 || r > rows {
        return Err(Error::arg(format!("rank index r={r} outside 1..={rows}")));
    }
    Ok(())
}

/// Σ_{i≤r} σ_i.
pub fn kyfan_of(sigma: &[f64], r: usize) -> f64 {
    sigma.iter().take(r).sum()
}

/// θ_r = Σ_{i>r} σ_i, summed directly from the tail.
pub fn theta_of(sigma: &[f64], r: usize) -> f64 {
    sigma.iter().skip(r).sum()
}

/// (H_r, η_r) from sorted singular values.
pub fn truncated_of(sigma: &[f64], r: usize) -> (f64, f64) {
    let head: f64 = sigma.iter().take(r - 1).sum();
    let tail = &sigma[r - 1..];
    let tail_sum: f64 = tail.iter().sum();
    let tail_fro = tail.iter().map(|s| s * s).sum::<f64>().sqrt();
    (head + tail_fro, (tail_sum - tail_fro).max(0.0))
}

/// Σ_{i>r} σ_i^p, treating σ_i below roundoff level as zero.
pub fn schatten_tail_of(sigma: &[f64], r: usize, p: f64, dim: usize) -> f64 {
    let tiny = roundoff_floor(sigma, dim);
    sigma
        .iter()
        .skip(r)
        .filter(|&&s| s > tiny)
        .map(|s| s.powf(p))
        .sum()
}

/// Singular values at or below this level are factorization noise.
pub(crate) fn roundoff_floor(sigma: &[f64], dim: usize) -> f64 {
    dim.max(1) as f64 * f64::EPSILON * sigma.first().copied().unwrap_or(0.0)
}

pub fn kyfan_norm(x: &Matrix, r: usize) -> Result<f64> {
    check_rank_index(r, x.rows())?;
    Ok(kyfan_of(&singular_values(x)?, r))
}

pub fn nuclear_norm(x: &Matrix) -> Result<f64> {
    Ok(singular_values(x)?.iter().sum())
}

pub fn spectral_norm(x: &Matrix) -> Result<f64> {
    Ok(singular_values(x)?.first().copied().unwrap_or(0.0))
}

/// θ_r(X) = ‖X‖_* − ‖X‖_(r).
pub fn rank_residual(x: &Matrix, r: usize) -> Result<f64> {
    check_rank_index(r, x.rows())?;
    Ok(theta_of(&singular_values(x)?, r))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedResidual {
    /// H_r(X) = Σ_{i<r} σ_i + (Σ_{i≥r} σ_i²)^½
    pub h: f64,
    /// η_r(X) = ‖X‖_* − H_r(X)
    pub eta: f64,
}

pub fn truncated_residual(x: &Matrix, r: usize) -> Result<TruncatedResidual> {
    check_rank_index(r, x.rows())?;
    let (h, eta) = truncated_of(&singular_values(x)?, r);
    Ok(TruncatedResidual { h, eta })
}

pub fn schatten_tail(x: &Matrix, r: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::arg(format!("Schatten exponent p={p} outside (0,1)")));
    }
    if r == 0 || r >= x.rows() {
        return Err(Error::arg(format!(
            "rank index r={r} outside 1..{}",
            x.rows()
        )));
    }
    Ok(schatten_tail_of(
        &singular_values(x)?,
        r,
        p,
        x.rows().max(x.cols()),
    ))
}

/// #{i : σ_i > eps·σ_1}.
pub fn numeric_rank(x: &Matrix, eps: f64) -> Result<usize> {
    Ok(rank_of(&singular_values(x)?, eps))
}

pub fn rank_of(sigma: &[f64], eps: f64) -> usize {
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > eps * top).count()
}

/// W = U_1 V_1^T over the first r columns. Ties at σ_r = σ_{r+1} follow
/// the decomposition's column order.
pub fn kyfan_subgradient(d: &SpectralDecomposition, r: usize) -> Result<Matrix> {
    let v = d.require_svd()?;
    check_rank_index(r, d.values.len())?;
    let g: Vec<f64> = (0..r).map(|_| 1.0).collect();
    Ok(Matrix::wrap(
        linalg::recompose(&d.left, &g, v),
        d.symmetric,
    ))
}

/// Weights g of the H_r subgradient U diag(g) V^T.
pub fn hr_weights(sigma: &[f64], r: usize) -> Vec<f64> {
    let tail_fro = sigma[r - 1..].iter().map(|s| s * s).sum::<f64>().sqrt();
    sigma
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if i + 1 < r {
                1.0
            } else if tail_fro == 0.0 {
                0.0
            } else {
                s / tail_fro
            }
        })
        .collect()
}

pub fn hr_subgradient(d: &SpectralDecomposition, r: usize) -> Result<Matrix> {
    let v = d.require_svd()?;
    check_rank_index(r, d.values.len())?;
    let g = hr_weights(&d.values, r);
    Ok(Matrix::wrap(
        linalg::recompose(&d.left, &g, v),
        d.symmetric,
    ))
}

/// Singular-value soft thresholding: U diag((σ − τ)_+) V^T.
pub fn soft_threshold(x: &Matrix, tau: f64) -> Result<Matrix> {
    if tau < 0.0 {
        return Err(Error::arg("threshold must be nonnegative"));
    }
    Ok(Matrix::wrap(svt(x.as_dmatrix(), tau)?, x.is_symmetric()))
}

pub(crate) fn svt(a: &Mat, tau: f64) -> Result<Mat> {
    let (u, s, v) = linalg::svd(a)?;
    let d: Vec<f64> = s.iter().map(|x| (x - tau).max(0.0)).collect();
    Ok(linalg::recompose(&u, &d, &v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::diag(v).unwrap()
    }

    fn swap() -> Matrix {
        Matrix::symmetric(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&diag(&[3.0, 2.0, 1.0]), DecompMode::Svd).unwrap();
        assert_eq!(d.values(), &[3.0, 2.0, 1.0]);
        let u = d.left();
        for i in 0..3 {
            assert!((u[(i, i)].abs() - 1.0).abs() < 1e-14);
        }
        let z = decompose(&Matrix::zeros(2, 3), DecompMode::Svd).unwrap();
        assert_eq!(z.values(), &[0.0, 0.0]);
        let s = decompose(&swap(), DecompMode::Svd).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-14 && (s.values()[1] - 1.0).abs() < 1e-14);
        assert!(decompose(&Matrix::zeros(2, 3), DecompMode::Eig).is_err());
    }

    #[test]
    fn eig_mode_reconstructs() {
        let x = Matrix::symmetric(3, &[2.0, -1.0, 0.5, -1.0, 0.0, 0.3, 0.5, 0.3, -1.0]).unwrap();
        let d = decompose(&x, DecompMode::Eig).unwrap();
        assert!(d.values().windows(2).all(|w| w[0] >= w[1]));
        assert!(d.values()[2] < 0.0);
        assert!(d.reconstruct().sub(&x).unwrap().fro_norm() < 1e-12);
    }

    #[test]
    fn kyfan_examples() {
        let x = diag(&[3.0, 2.0, 1.0]);
        assert_eq!(kyfan_norm(&x, 1).unwrap(), 3.0);
        assert_eq!(kyfan_norm(&x, 3).unwrap(), 6.0);
        assert!((kyfan_norm(&swap(), 1).unwrap() - 1.0).abs() < 1e-14);
        assert!(kyfan_norm(&x, 0).is_err());
        assert!(kyfan_norm(&x, 4).is_err());
    }

    #[test]
    fn rank_residual_examples() {
        assert!((rank_residual(&Matrix::identity(3), 1).unwrap() - 2.0).abs() < 1e-14);
        assert!((rank_residual(&diag(&[3.0, 2.0, 1.0]), 2).unwrap() - 1.0).abs() < 1e-14);
        let low = Matrix::new(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]).unwrap();
        assert!(rank_residual(&low, 1).unwrap() < 1e-10);
    }

    #[test]
    fn truncated_examples() {
        let t = truncated_residual(&diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        assert!((t.h - (3.0 + 5f64.sqrt())).abs() < 1e-13);
        assert!((t.eta - (3.0 - 5f64.sqrt())).abs() < 1e-13);
        let t = truncated_residual(&diag(&[3.0, 0.0, 0.0]), 1).unwrap();
        assert_eq!((t.h, t.eta), (3.0, 0.0));
        let t = truncated_residual(&swap(), 1).unwrap();
        assert!((t.h - 2f64.sqrt()).abs() < 1e-14);
        assert!((t.eta - (2.0 - 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn schatten_examples() {
        assert!((schatten_tail(&diag(&[3.0, 2.0, 1.0]), 2, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((schatten_tail(&diag(&[4.0, 1.0, 0.25]), 1, 0.5).unwrap() - 1.5).abs() < 1e-14);
        let low = Matrix::new(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]).unwrap();
        assert!(schatten_tail(&low, 1, 0.5).unwrap() < 1e-10);
        assert!(schatten_tail(&low, 1, 1.0).is_err());
        assert!(schatten_tail(&low, 2, 0.5).is_err());
    }

    #[test]
    fn kyfan_subgradient_examples() {
        let d = decompose(&diag(&[3.0, 2.0, 1.0]), DecompMode::Svd).unwrap();
        let w = kyfan_subgradient(&d, 2).unwrap();
        assert!(w.sub(&diag(&[1.0, 1.0, 0.0])).unwrap().fro_norm() < 1e-14);
        let w = kyfan_subgradient(&d, 3).unwrap();
        assert!(w.sub(&Matrix::identity(3)).unwrap().fro_norm() < 1e-14);
        let d = decompose(&swap(), DecompMode::Svd).unwrap();
        let w = kyfan_subgradient(&d, 2).unwrap();
        assert!((w.inner(&swap()) - 2.0).abs() < 1e-12);
        let e = decompose(&swap(), DecompMode::Eig).unwrap();
        assert!(kyfan_subgradient(&e, 1).is_err());
    }

    #[test]
    fn hr_subgradient_examples() {
        let x = diag(&[3.0, 2.0, 1.0]);
        let d = decompose(&x, DecompMode::Svd).unwrap();
        let g = hr_weights(d.values(), 2);
        let s5 = 5f64.sqrt();
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!((g[1] - 2.0 / s5).abs() < 1e-15);
        assert!((g[2] - 1.0 / s5).abs() < 1e-15);
        let w = hr_subgradient(&d, 2).unwrap();
        assert!((w.inner(&x) - (3.0 + s5)).abs() < 1e-12);

        // Tail σ_1..σ_3 = (3,0,0) is not degenerate at r=1: g = (1,0,0).
        let x = diag(&[3.0, 0.0, 0.0]);
        let d = decompose(&x, DecompMode::Svd).unwrap();
        assert_eq!(hr_weights(d.values(), 1), vec![1.0, 0.0, 0.0]);
        let w = hr_subgradient(&d, 1).unwrap();
        assert!((w.inner(&x) - 3.0).abs() < 1e-14);
        // Degenerate tail at r=2: the zero rule applies.
        assert_eq!(hr_weights(d.values(), 2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn soft_threshold_diag() {
        let y = soft_threshold(&diag(&[3.0, 2.0, 1.0]), 1.5).unwrap();
        assert!(y.sub(&diag(&[1.5, 0.5, 0.0])).unwrap().fro_norm() < 1e-14);
    }

    #[test]
    fn numeric_rank_threshold() {
        assert_eq!(numeric_rank(&diag(&[1.0, 1e-9, 0.0]), DEFAULT_RANK_EPS).unwrap(), 1);
        assert_eq!(numeric_rank(&diag(&[1.0, 1e-7, 0.0]), DEFAULT_RANK_EPS).unwrap(), 2);
        assert_eq!(numeric_rank(&Matrix::zeros(2, 2), DEFAULT_RANK_EPS).unwrap(), 0);
    }
}
