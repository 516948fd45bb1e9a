//! Projection kernels: rank truncation, PSD rank truncation, norm balls,
//! simplices and Dykstra's algorithm.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{symmetrize, Mat, Matrix};

use super::affine::AffineMap;
use super::NormKind;

pub const DYKSTRA_CAP: usize = 5000;
pub const DYKSTRA_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankMetric {
    Frobenius,
    Nuclear,
}

/// Truncated SVD U_1 Σ_r V_1^T. It is a nearest rank-r point in both
/// the Frobenius and the nuclear norm, so `metric` only documents intent.
pub fn project_rank(x: &Matrix, r: usize, metric: RankMetric) -> Result<Matrix> {
    let _ = metric;
    if r == 0 || r > x.rows() {
        return Err(Error::arg(format!("rank index r={r} outside 1..={}", x.rows())));
    }
    Ok(Matrix::wrap(rank_truncate(x.as_dmatrix(), r)?, x.is_symmetric()))
}

pub(crate) fn rank_truncate(a: &Mat, r: usize) -> Result<Mat> {
    let (u, s, v) = linalg::svd(a)?;
    let d: Vec<f64> = s
        .iter()
        .enumerate()
        .map(|(i, &x)| if i < r { x } else { 0.0 })
        .collect();
    Ok(linalg::recompose(&u, &d, &v))
}

/// P diag(max(λ_i, 0) for i ≤ r, else 0) P^T.
pub fn project_psd_rank(x: &Matrix, r: usize) -> Result<Matrix> {
    if !x.is_symmetric() {
        return Err(Error::arg("project_psd_rank needs a symmetric matrix"));
    }
    if r == 0 || r > x.rows() {
        return Err(Error::arg(format!("rank index r={r} outside 1..={}", x.rows())));
    }
    Ok(Matrix::wrap(psd_rank_truncate(x.as_dmatrix(), r)?, true))
}

pub(crate) fn psd_rank_truncate(a: &Mat, r: usize) -> Result<Mat> {
    let (vals, p) = linalg::eig(&symmetrize(a))?;
    let d: Vec<f64> = vals
        .iter()
        .enumerate()
        .map(|(i, &l)| if i < r { l.max(0.0) } else { 0.0 })
        .collect();
    Ok(symmetrize(&linalg::recompose(&p, &d, &p)))
}

/// Euclidean projection onto {w ≥ 0, Σ w = total}.
pub(crate) fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - total) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projection of a nonnegative vector onto {w ≥ 0, Σ w ≤ radius}.
fn project_l1_nonneg(v: &[f64], radius: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= radius {
        clipped
    } else {
        project_simplex(&clipped, radius)
    }
}

/// Projection of a nonnegative spectrum onto the matching vector ball.
fn project_spectrum(values: &[f64], norm: NormKind, radius: f64) -> Vec<f64> {
    match norm {
        NormKind::Spectral => values.iter().map(|&s| s.clamp(0.0, radius)).collect(),
        NormKind::Frobenius => {
            let f = values.iter().map(|s| s * s).sum::<f64>().sqrt();
            if f <= radius {
                values.to_vec()
            } else {
                values.iter().map(|s| s * radius / f).collect()
            }
        }
        NormKind::Nuclear => project_l1_nonneg(values, radius),
    }
}

pub(crate) fn project_ball(a: &Mat, norm: NormKind, radius: f64, symmetric: bool) -> Result<Mat> {
    if norm == NormKind::Frobenius {
        let f = a.norm();
        let out = if f <= radius { a.clone() } else { a * (radius / f) };
        return Ok(if symmetric { symmetrize(&out) } else { out });
    }
    let (u, s, v) = linalg::svd(a)?;
    let d = project_spectrum(&s, norm, radius);
    let out = linalg::recompose(&u, &d, &v);
    Ok(if symmetric { symmetrize(&out) } else { out })
}

/// Projection onto {X ⪰ 0, ‖X‖ ≤ radius}: eigenvalues are clipped at zero
/// and then projected onto the corresponding vector ball.
pub(crate) fn project_psd_ball(a: &Mat, norm: NormKind, radius: f64) -> Result<Mat> {
    let (vals, p) = linalg::eig(&symmetrize(a))?;
    let pos: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    let d = project_spectrum(&pos, norm, radius);
    Ok(symmetrize(&linalg::recompose(&p, &d, &p)))
}

pub(crate) fn project_halfspace(a: &Mat, normal: &Mat, bound: f64) -> Mat {
    let excess = normal.dot(a) - bound;
    if excess <= 0.0 {
        return a.clone();
    }
    let nn = normal.norm_squared();
    if nn == 0.0 {
        return a.clone();
    }
    a - normal * (excess / nn)
}

pub(crate) type Projector<'a> = Box<dyn Fn(&Mat) -> Result<Mat> + Sync + 'a>;

#[derive(Clone, Debug)]
pub struct DykstraOutcome {
    pub x: Mat,
    pub iterations: usize,
    pub last_change: f64,
}

/// Cyclic Dykstra over closed convex sets. Stops when one full cycle moves
/// the iterate by at most `tol` in Frobenius norm.
pub(crate) fn dykstra(
    x0: &Mat,
    projectors: &[Projector<'_>],
    tol: f64,
    cap: usize,
) -> Result<DykstraOutcome> {
    let mut x = x0.clone();
    let mut incr: Vec<Mat> = projectors
        .iter()
        .map(|_| Mat::zeros(x0.nrows(), x0.ncols()))
        .collect();
    let mut change = f64::INFINITY;
    for it in 1..=cap {
        let prev = x.clone();
        for (p, inc) in projectors.iter().zip(incr.iter_mut()) {
            let y = &x + &*inc;
            let next = p(&y)?;
            *inc = y - &next;
            x = next;
        }
        change = (&x - &prev).norm();
        if change <= tol {
            return Ok(DykstraOutcome {
                x,
                iterations: it,
                last_change: change,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "Dykstra projection".into(),
        iterations: cap,
        residual: change,
    })
}

const NEWTON_CAP: usize = 200;

/// Projection onto {X ⪰ 0 : <A_i, X> = b_i} by semismooth Newton on the
/// dual θ(y) = ½‖(G + 𝒜*y)_+‖² − <b, y>, stopping at ‖𝒜(X) − b‖ ≤ tol.
/// `None` when Newton stalls, e.g. for an empty intersection.
pub(crate) fn project_psd_affine(g: &Mat, affine: &AffineMap, tol: f64) -> Result<Option<Mat>> {
    let ops: Vec<Mat> = affine.ops().iter().map(symmetrize).collect();
    let b = DVector::from_column_slice(affine.rhs());
    let m = ops.len();
    let tol = tol.max(1e-14 * (1.0 + g.norm()));
    let adjoint = |y: &DVector<f64>| -> Mat {
        let mut z = g.clone();
        for (a, yi) in ops.iter().zip(y.iter()) {
            z += a * *yi;
        }
        z
    };
    let apply = |x: &Mat| DVector::from_iterator(m, ops.iter().map(|a| a.dot(x)));
    let eval = |y: &DVector<f64>| -> Result<(Vec<f64>, Mat, Mat, f64)> {
        let (vals, p) = linalg::eig(&adjoint(y))?;
        let plus: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
        let x = symmetrize(&linalg::recompose(&p, &plus, &p));
        let theta = 0.5 * x.norm_squared() - b.dot(y);
        Ok((vals, p, x, theta))
    };
    let mut y = DVector::zeros(m);
    let (mut vals, mut p, mut x, mut theta) = eval(&y)?;
    for _ in 0..NEWTON_CAP {
        let f = apply(&x) - &b;
        let fnorm = f.norm();
        if fnorm <= tol {
            return Ok(Some(x));
        }
        let n = vals.len();
        let omega = Mat::from_fn(n, n, |i, j| {
            let (li, lj) = (vals[i], vals[j]);
            match (li > 0.0, lj > 0.0) {
                (true, true) => 1.0,
                (false, false) => 0.0,
                _ => (li.max(0.0) - lj.max(0.0)) / (li - lj),
            }
        });
        let rotated: Vec<Mat> = ops.iter().map(|a| p.transpose() * a * &p).collect();
        let mut jac = DMatrix::from_fn(m, m, |k, l| rotated[k].dot(&rotated[l].component_mul(&omega)));
        let mu = fnorm.min(1e-2).max(1e-12);
        for k in 0..m {
            jac[(k, k)] += mu;
        }
        let mut dir = match jac.cholesky() {
            Some(ch) => ch.solve(&(-&f)),
            None => -&f,
        };
        if f.dot(&dir) >= 0.0 {
            dir = -&f;
        }
        let slope = f.dot(&dir);
        let mut t = 1.0;
        loop {
            let trial = &y + &dir * t;
            let out = eval(&trial)?;
            // The residual test covers steps where θ ~ ‖G‖² drowns in roundoff.
            let decrease = out.3 <= theta + 1e-4 * t * slope
                || (apply(&out.2) - &b).norm() <= (1.0 - 1e-4 * t) * fnorm;
            if decrease {
                y = trial;
                (vals, p, x, theta) = out;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Ok(None);
            }
        }
    }
    Ok(None)
}

pub(crate) fn psd_projector<'a>() -> Projector<'a> {
    Box::new(|a: &Mat| linalg::psd_part(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_projection_examples() {
        let x = Matrix::diag(&[3.0, 2.0, 1.0]).unwrap();
        let p = project_rank(&x, 1, RankMetric::Frobenius).unwrap();
        assert!(p.sub(&Matrix::diag(&[3.0, 0.0, 0.0]).unwrap()).unwrap().fro_norm() < 1e-14);
        let low = Matrix::new(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]).unwrap();
        let q = project_rank(&low, 1, RankMetric::Nuclear).unwrap();
        assert!(q.sub(&low).unwrap().fro_norm() < 1e-10);
    }

    #[test]
    fn psd_rank_projection_examples() {
        let p = project_psd_rank(&Matrix::diag(&[3.0, -1.0]).unwrap(), 1).unwrap();
        assert!(p.sub(&Matrix::diag(&[3.0, 0.0]).unwrap()).unwrap().fro_norm() < 1e-14);
        let p = project_psd_rank(&Matrix::diag(&[-1.0, -2.0]).unwrap(), 1).unwrap();
        assert!(p.fro_norm() < 1e-14);
    }

    #[test]
    fn simplex_projection() {
        let w = project_simplex(&[0.5, 0.5], 1.0);
        assert_eq!(w, vec![0.5, 0.5]);
        let w = project_simplex(&[2.0, 0.0], 1.0);
        assert_eq!(w, vec![1.0, 0.0]);
        let w = project_simplex(&[0.3, 0.3, 0.3], 1.0);
        assert!(w.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn nuclear_ball_spectrum() {
        let d = project_spectrum(&[3.0, 1.0], NormKind::Nuclear, 2.0);
        assert!((d[0] - 2.0).abs() < 1e-15 && d[1].abs() < 1e-15);
        let d = project_spectrum(&[0.5, 0.25], NormKind::Nuclear, 2.0);
        assert_eq!(d, vec![0.5, 0.25]);
    }

    #[test]
    fn halfspace() {
        let n = Mat::from_row_slice(1, 2, &[1.0, 0.0]);
        let a = Mat::from_row_slice(1, 2, &[3.0, 1.0]);
        let p = project_halfspace(&a, &n, 1.0);
        assert_eq!(p, Mat::from_row_slice(1, 2, &[1.0, 1.0]));
    }

    #[test]
    fn newton_projection_matches_dykstra_on_correlation() {
        let set = super::super::ConstraintSet::correlation(4).unwrap();
        let affine = set.affine().unwrap();
        let mut g = crate::rng::stream(11, 0);
        let z = crate::rng::gaussian_sym(4, &mut g) * 2.0;
        let x = project_psd_affine(&z, affine, 1e-13).unwrap().unwrap();
        assert!(affine.residual(&x) <= 1e-12);
        assert!(linalg::min_eig(&x).unwrap() >= -1e-12);
        let projs: Vec<Projector<'_>> = vec![
            Box::new(move |a: &Mat| Ok(affine.project(a))),
            psd_projector(),
        ];
        let d = dykstra(&z, &projs, 1e-13, 200_000).unwrap().x;
        assert!((&x - &d).norm() < 1e-8, "{}", (&x - &d).norm());
        // Variational inequality against feasible points.
        for k in 1..50 {
            let mut h = crate::rng::stream(11, k);
            let v = crate::rng::gaussian(4, 2, &mut h);
            let mut y = &v * v.transpose();
            for i in 0..4 {
                let s = y[(i, i)].sqrt();
                for j in 0..4 {
                    y[(i, j)] /= s;
                    y[(j, i)] /= s;
                }
            }
            assert!((&z - &x).dot(&(&y - &x)) <= 1e-9);
        }
    }
}
