//! Proximal alternating minimization on ½‖X − Y‖² + δ_Ω(X) + δ_Λ(Y).
//!
//! PSD-intersected sets alternate between Ξ and Λ_r^+, whose intersection
//! is again Γ_r because Λ_r^+ ⊆ S_+^n.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{Mat, Matrix};
use crate::rng;
use crate::sets::ConstraintSet;

const STALL_WINDOW: usize = 50;
const MONOTONE_SLACK: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;
const PERTURBATION: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct PamOptions {
    /// Proximal weight c ≥ 0; c = 0 is plain alternating projection.
    pub c: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Number of trailing iterations used to fit the linear rate.
    pub fit_window: usize,
    pub projection_tol: f64,
}

impl Default for PamOptions {
    fn default() -> Self {
        PamOptions {
            c: 1.0,
            tol: 1e-10,
            max_iters: 5000,
            seed: 0,
            fit_window: 20,
            projection_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PamStep {
    pub iter: usize,
    pub x: Matrix,
    pub y: Matrix,
    pub dist: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PamTrace {
    pub steps: Vec<PamStep>,
    pub converged: bool,
    pub iterations: usize,
    /// Residual of the final Y in the set (Y is in Λ exactly).
    pub terminal_residual: f64,
    /// exp(slope) of a least-squares fit of log dist_k.
    pub rate: Option<f64>,
    /// Whether a seeded perturbation broke a spectral tie in X0.
    pub perturbed: bool,
}

impl PamTrace {
    pub fn final_point(&self) -> Option<&Matrix> {
        self.steps.last().map(|s| &s.y)
    }
}

pub fn pam_feasibility(
    set: &ConstraintSet,
    r: usize,
    x0: &Matrix,
    opts: &PamOptions,
) -> Result<PamTrace> {
    set.check(x0, "X0")?;
    if r == 0 || r > set.rows() {
        return Err(Error::arg(format!("rank index r={r} outside 1..={}", set.rows())));
    }
    if !(opts.c >= 0.0 && opts.c.is_finite()) {
        return Err(Error::arg(format!("c must be nonnegative, got {}", opts.c)));
    }
    if !(opts.tol > 0.0) || opts.max_iters == 0 {
        return Err(Error::arg("tol and max_iters must be positive"));
    }
    let c = opts.c;
    let psd = set.psd_intersected();
    let project_x = |a: &Mat| {
        if psd {
            set.project_xi_mat(a, opts.projection_tol)
        } else {
            set.project_mat(a, opts.projection_tol)
        }
    };
    let (mut x, perturbed) = break_ties(x0.as_dmatrix(), r, set, opts.seed)?;
    let mut y = set.project_rank_side(&x, r)?;
    let mut steps = Vec::new();
    let mut prev = (&x - &y).norm();
    let mut bad_run = 0;
    let mut converged = prev <= opts.tol;
    let mut iterations = 0;
    while !converged && iterations < opts.max_iters {
        iterations += 1;
        x = project_x(&((&y + &x * c) / (1.0 + c)))?;
        y = set.project_rank_side(&((&x + &y * c) / (1.0 + c)), r)?;
        let dist = (&x - &y).norm();
        steps.push(PamStep {
            iter: iterations,
            x: set.wrap(x.clone()),
            y: set.wrap(y.clone()),
            dist,
        });
        if dist > prev + MONOTONE_SLACK * (1.0 + prev) {
            bad_run += 1;
            if bad_run >= STALL_WINDOW {
                return Err(Error::Stall(format!(
                    "feasibility distance rose for {STALL_WINDOW} consecutive iterations (now {dist:.3e})"
                )));
            }
        } else {
            bad_run = 0;
        }
        prev = dist;
        converged = dist <= opts.tol;
    }
    if steps.is_empty() {
        steps.push(PamStep {
            iter: 0,
            x: set.wrap(x.clone()),
            y: set.wrap(y.clone()),
            dist: prev,
        });
    }
    let terminal_residual = set.residual_mat(&y)?;
    let dists: Vec<f64> = steps.iter().map(|s| s.dist).collect();
    Ok(PamTrace {
        rate: fit_rate(&dists, opts.fit_window),
        steps,
        converged,
        iterations,
        terminal_residual,
        perturbed,
    })
}

/// A tie between the r-th and (r+1)-th spectral values makes the rank-side
/// projection ambiguous; a small seeded perturbation picks one branch.
fn break_ties(x0: &Mat, r: usize, set: &ConstraintSet, seed: u64) -> Result<(Mat, bool)> {
    let vals: Vec<f64> = if set.psd_intersected() {
        linalg::eig(&crate::matrix::symmetrize(x0))?.0
    } else {
        linalg::singular_values(x0)?
    };
    if r >= vals.len() {
        return Ok((x0.clone(), false));
    }
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if (vals[r - 1] - vals[r]).abs() > TIE_TOL * (1.0 + top) || vals[r - 1] <= TIE_TOL * (1.0 + top) {
        return Ok((x0.clone(), false));
    }
    let mut g = rng::stream(seed, u64::MAX);
    let d = rng::gaussian_like(x0.shape(), set.is_symmetric(), &mut g);
    let scale = PERTURBATION * x0.norm().max(1.0) / d.norm().max(f64::MIN_POSITIVE);
    Ok((x0 + d * scale, true))
}

fn fit_rate(dists: &[f64], window: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = dists
        .iter()
        .enumerate()
        .rev()
        .take(window.max(2))
        .filter(|(_, &d)| d > 0.0)
        .map(|(k, &d)| (k as f64, d.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| (sxy / sxx).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn member_converges_at_once() {
        let c = ConstraintSet::correlation(3).unwrap();
        let x0 = Matrix::symmetric(3, &[1.0; 9]).unwrap();
        let t = pam_feasibility(&c, 1, &x0, &PamOptions::default()).unwrap();
        assert!(t.converged);
        assert!(t.iterations <= 1);
    }

    #[test]
    fn correlation_identity_start() {
        let c = ConstraintSet::correlation(3).unwrap();
        let t = pam_feasibility(&c, 1, &Matrix::identity(3), &PamOptions::default()).unwrap();
        assert!(t.perturbed);
        assert!(t.converged, "dist {}", t.steps.last().unwrap().dist);
        assert!(t.terminal_residual <= 1e-8);
        let q = t.rate.unwrap();
        assert!(q < 1.0, "rate {q}");
        for w in t.steps.windows(2) {
            assert!(w[1].dist <= w[0].dist + 1e-12 * (1.0 + w[0].dist));
        }
    }

    #[test]
    fn rate_fit_on_geometric_sequence() {
        let d: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k)).collect();
        assert!((fit_rate(&d, 20).unwrap() - 0.5).abs() < 1e-12);
    }
}
