//! The lifted form min f(X) + ν Σ φ(σ_i(W)) s.t. ‖X‖_* = <W, X>, ‖W‖ ≤ 1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{same_shape, Mat, Matrix};
use crate::penalty::ProblemSpec;
use crate::spectral::{self, DEFAULT_RANK_EPS};

use super::SurrogateFamily;

/// Slack on ‖W‖ ≤ 1 and on the complementarity residual.
pub const MPEC_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct MpecPoint {
    pub x: Matrix,
    pub w: Matrix,
}

/// (f(X) + ν Σ φ(min(σ_i(W), 1)), ‖X‖_* − <W, X>).
pub fn mpec_evaluate(
    problem: &ProblemSpec,
    family: &SurrogateFamily,
    pt: &MpecPoint,
) -> Result<(f64, f64)> {
    problem.set.check(&pt.x, "X")?;
    same_shape(&pt.x, &pt.w, "W")?;
    let sw = spectral::singular_values(&pt.w)?;
    let norm = sw.first().copied().unwrap_or(0.0);
    if norm > 1.0 + MPEC_TOL {
        return Err(Error::arg(format!("‖W‖ = {norm:.12} exceeds 1")));
    }
    let phi_sum: f64 = sw.iter().map(|&s| family.phi(s.min(1.0))).sum();
    let objective = problem.objective.value(&pt.x)? + problem.nu * phi_sum;
    let residual = spectral::nuclear_norm(&pt.x)? - pt.x.inner(&pt.w);
    Ok((objective, residual))
}

/// W = U_1 V_1^T + t* U_2 V_2^T split at the numeric rank of X. Symmetric
/// PSD X is lifted through its eigendecomposition, so W is symmetric with
/// t*·I ⪯ W ⪯ I.
pub fn lift_to_mpec(x: &Matrix, family: &SurrogateFamily) -> Result<MpecPoint> {
    let xm = x.as_dmatrix();
    let t = family.t_star();
    let weights = |values: &[f64]| -> Vec<f64> {
        let r = spectral::rank_of(values, DEFAULT_RANK_EPS);
        (0..values.len()).map(|i| if i < r { 1.0 } else { t }).collect()
    };
    if x.is_symmetric() {
        let (vals, p) = linalg::eig(xm)?;
        let top = vals.first().copied().unwrap_or(0.0).abs();
        let floor = -DEFAULT_RANK_EPS * top.max(f64::MIN_POSITIVE);
        if vals.iter().all(|&v| v >= floor) {
            let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
            let w = linalg::recompose(&p, &weights(&clipped), &p);
            return Ok(MpecPoint {
                x: x.clone(),
                w: Matrix::wrap(crate::matrix::symmetrize(&w), true),
            });
        }
    }
    let (u, s, v) = linalg::svd(xm)?;
    let w: Mat = linalg::recompose(&u, &weights(&s), &v);
    Ok(MpecPoint {
        x: x.clone(),
        w: Matrix::wrap(w, false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::Objective;
    use crate::sets::ConstraintSet;

    fn problem(rows: usize, cols: usize, nu: f64) -> ProblemSpec {
        ProblemSpec::new(Objective::zero(rows, cols), ConstraintSet::ambient(rows, cols).unwrap(), 1)
            .unwrap()
            .with_nu(nu)
            .unwrap()
    }

    fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
        let d = a.sub(b).unwrap().fro_norm();
        assert!(d <= tol, "distance {d}");
    }

    #[test]
    fn zero_pair() {
        let p = problem(2, 2, 1.0);
        let pt = MpecPoint {
            x: Matrix::zeros(2, 2),
            w: Matrix::zeros(2, 2),
        };
        let (obj, res) = mpec_evaluate(&p, &SurrogateFamily::linear(), &pt).unwrap();
        assert_eq!((obj, res), (0.0, 0.0));
    }

    #[test]
    fn lift_of_rank_one_diagonal() {
        let x = Matrix::diag(&[3.0, 0.0]).unwrap();
        let w = lift_to_mpec(&x, &SurrogateFamily::linear()).unwrap().w;
        assert_close(&w, &Matrix::diag(&[1.0, 0.0]).unwrap(), 1e-14);
        let half = SurrogateFamily::piecewise(&[(0.0, 0.5), (0.5, 0.0), (1.0, 1.0)], 0.5).unwrap();
        let w = lift_to_mpec(&x, &half).unwrap().w;
        assert_close(&w, &Matrix::diag(&[1.0, 0.5]).unwrap(), 1e-14);
    }

    #[test]
    fn lifted_objective_is_f_plus_rank() {
        let p = problem(2, 3, 0.3);
        let x = Matrix::new(2, 3, &[1.0, -2.0, 0.5, 2.0, -4.0, 1.0]).unwrap();
        for fam in [SurrogateFamily::linear(), SurrogateFamily::quad_shift()] {
            let pt = lift_to_mpec(&x, &fam).unwrap();
            let (obj, res) = mpec_evaluate(&p, &fam, &pt).unwrap();
            assert!((obj - 0.3).abs() < 1e-12);
            assert!(res.abs() <= MPEC_TOL);
        }
    }

    #[test]
    fn scaled_polar_factor_residual() {
        let p = problem(3, 3, 1.0);
        let x = Matrix::new(3, 3, &[2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        // Polar factor of this X (a partial permutation) written out directly.
        let polar = Matrix::new(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        for t in [0.0, 0.25, 0.5] {
            let w = Matrix::from_dmatrix(polar.as_dmatrix() * t).unwrap();
            let pt = MpecPoint { x: x.clone(), w };
            let (_, res) = mpec_evaluate(&p, &SurrogateFamily::linear(), &pt).unwrap();
            assert!((res - (1.0 - t) * 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn psd_lift_is_symmetric() {
        let x = Matrix::symmetric(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let pt = lift_to_mpec(&x, &SurrogateFamily::quad_shift()).unwrap();
        assert!(pt.w.is_symmetric());
        assert_close(&pt.w, &Matrix::symmetric(2, &[0.5, 0.5, 0.5, 0.5]).unwrap(), 1e-14);
    }

    #[test]
    fn oversized_w_is_rejected() {
        let p = problem(2, 2, 1.0);
        let pt = MpecPoint {
            x: Matrix::identity(2),
            w: Matrix::diag(&[1.5, 0.0]).unwrap(),
        };
        assert!(matches!(
            mpec_evaluate(&p, &SurrogateFamily::linear(), &pt),
            Err(Error::Argument(_))
        ));
    }
}
