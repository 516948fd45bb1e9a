//! prox of τ‖·‖_* + δ_Ω.

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{symmetrize, Mat, Matrix};
use crate::sets::{project_ball, rank_truncate, ConstraintSet, Family, DYKSTRA_CAP};
use crate::spectral::svt;

/// argmin_{X∈Ω} ½‖X − Z‖_F² + τ‖X‖_*. Symmetric sets use the symmetric
/// part of Z.
pub fn composite_prox(set: &ConstraintSet, z: &Matrix, tau: f64, tol: f64) -> Result<Matrix> {
    if (z.rows(), z.cols()) != set.shape() {
        return Err(Error::dim(
            "Z",
            format!("{}x{}", set.rows(), set.cols()),
            format!("{}x{}", z.rows(), z.cols()),
        ));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::arg(format!("threshold must be nonnegative, got {tau}")));
    }
    Ok(set.wrap(prox_mat(set, z.as_dmatrix(), tau, tol)?))
}

pub(crate) fn prox_mat(set: &ConstraintSet, z: &Mat, tau: f64, tol: f64) -> Result<Mat> {
    let z = if set.is_symmetric() { symmetrize(z) } else { z.clone() };
    if tau == 0.0 {
        return set.project_mat(&z, tol);
    }
    // On S_+ the nuclear norm is the trace, so the prox is a shifted projection.
    if set.psd_intersected() || matches!(set.family(), Family::PsdRankSet { .. }) {
        let n = z.nrows();
        return set.project_mat(&(z - Mat::identity(n, n) * tau), tol);
    }
    let sym = set.is_symmetric();
    let fix = |m: Mat| if sym { symmetrize(&m) } else { m };
    // Unitarily invariant sets act on the shrunk singular values directly.
    match set.family() {
        Family::Ambient => Ok(fix(svt(&z, tau)?)),
        Family::NormBall { norm, radius } => {
            Ok(fix(project_ball(&svt(&z, tau)?, *norm, *radius, sym)?))
        }
        Family::RankSet { r } => Ok(fix(rank_truncate(&svt(&z, tau)?, *r)?)),
        Family::FrobeniusSphere { radius } => sphere_prox(&z, tau, *radius).map(fix),
        _ => dykstra_prox(set, &z, tau, tol),
    }
}

/// Singular values ∝ (σ − τ)_+ rescaled to the sphere; when all of them
/// vanish the whole radius goes to the top singular pair.
fn sphere_prox(z: &Mat, tau: f64, radius: f64) -> Result<Mat> {
    let (u, s, v) = linalg::svd(z)?;
    let mut d: Vec<f64> = s.iter().map(|x| (x - tau).max(0.0)).collect();
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        d.iter_mut().for_each(|x| *x *= radius / norm);
    } else {
        d.iter_mut().for_each(|x| *x = 0.0);
        d[0] = radius;
    }
    Ok(linalg::recompose(&u, &d, &v))
}

/// Dykstra-like splitting for prox_{g+h}: alternates the prox of τ‖·‖_*
/// with the projection onto Ω, carrying one correction per operator.
fn dykstra_prox(set: &ConstraintSet, z: &Mat, tau: f64, tol: f64) -> Result<Mat> {
    let mut x = z.clone();
    let mut p = Mat::zeros(z.nrows(), z.ncols());
    let mut q = p.clone();
    let mut change = f64::INFINITY;
    for _ in 0..DYKSTRA_CAP {
        let y = svt(&(&x + &p), tau)?;
        p = &x + &p - &y;
        let next = set.project_mat(&(&y + &q), tol * 0.1)?;
        q = &y + &q - &next;
        change = (&next - &x).norm();
        x = next;
        if change <= tol {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        what: "composite nuclear-norm prox".into(),
        iterations: DYKSTRA_CAP,
        residual: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::NormKind;

    fn objective(set: &ConstraintSet, x: &Mat, z: &Mat, tau: f64) -> f64 {
        let _ = set;
        0.5 * (x - z).norm_squared() + tau * linalg::nuclear_norm(x).unwrap()
    }

    #[test]
    fn ambient_prox_is_soft_thresholding() {
        let set = ConstraintSet::ambient_sym(3).unwrap();
        let z = Matrix::diag(&[3.0, 2.0, 1.0]).unwrap();
        let x = composite_prox(&set, &z, 1.5, 1e-12).unwrap();
        let want = Matrix::diag(&[1.5, 0.5, 0.0]).unwrap();
        assert!(x.sub(&want).unwrap().fro_norm() < 1e-14);
    }

    #[test]
    fn dykstra_prox_beats_feasible_perturbations() {
        use crate::rng;
        let set = ConstraintSet::doubly_stochastic(3).unwrap();
        let mut g = rng::stream(4, 0);
        let z = rng::gaussian(3, 3, &mut g);
        let tau = 0.3;
        let x = prox_mat(&set, &z, tau, 1e-12).unwrap();
        assert!(set.residual_mat(&x).unwrap() < 1e-9);
        let best = objective(&set, &x, &z, tau);
        for k in 1..200 {
            let mut g = rng::stream(4, k);
            let cand = set
                .project_mat(&(&x + rng::gaussian(3, 3, &mut g) * 0.05), 1e-12)
                .unwrap();
            assert!(objective(&set, &cand, &z, tau) >= best - 1e-9);
        }
    }

    #[test]
    fn ball_and_sphere_prox() {
        let z = Mat::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let ball = ConstraintSet::norm_ball(NormKind::Spectral, 1.5, 2, 2).unwrap();
        let x = prox_mat(&ball, &z, 0.5, 1e-12).unwrap();
        assert!((x - Mat::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.5])).norm() < 1e-14);
        let sphere = ConstraintSet::frobenius_sphere(1.0, 2, 2).unwrap();
        let x = prox_mat(&sphere, &z, 2.0, 1e-12).unwrap();
        assert!((x - Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn psd_prox_shifts_then_projects() {
        let set = ConstraintSet::psd_cone(2).unwrap();
        let z = Matrix::diag(&[2.0, 0.5]).unwrap();
        let x = composite_prox(&set, &z, 1.0, 1e-12).unwrap();
        assert!(x.sub(&Matrix::diag(&[1.0, 0.0]).unwrap()).unwrap().fro_norm() < 1e-14);
    }
}
