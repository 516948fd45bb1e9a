//! Distance to Γ_r = Ω ∩ Λ_r, by enumeration (discrete rank-one families)
//! or multi-start alternating projections.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matrix::{Mat, Matrix};
use crate::rng;

use super::{psd_rank_truncate, rank_truncate, ConstraintSet, Family};

const AP_MAX_ITERS: usize = 5000;
const ACCEPT_TOL: f64 = 1e-8;
const RADII: [f64; 3] = [0.1, 0.5, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaMethod {
    Alternating,
    Enumerate,
}

impl GammaMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "alternating" => Ok(GammaMethod::Alternating),
            "enumerate" => Ok(GammaMethod::Enumerate),
            other => Err(Error::arg(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GammaOptions {
    pub method: GammaMethod,
    /// Number of alternating-projection runs (the first starts at X).
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            method: GammaMethod::Alternating,
            restarts: 32,
            seed: 0,
        }
    }
}

/// All points of Γ_1 for the discrete families.
pub fn enumerate_gamma(omega: &ConstraintSet, r: usize) -> Result<Vec<Matrix>> {
    Ok(enumerate_mat(omega, r)?
        .into_iter()
        .map(|m| Matrix::wrap(m, true))
        .collect())
}

const MAX_ENUM_DIM: usize = 16;

/// True when Γ_r is a finite set small enough to enumerate.
pub fn supports_enumeration(omega: &ConstraintSet, r: usize) -> bool {
    r == 1
        && omega.rows() <= MAX_ENUM_DIM
        && matches!(
            omega.family(),
            Family::Correlation | Family::QuadDiag | Family::BinaryQp { .. }
        )
}

pub(crate) fn enumerate_mat(omega: &ConstraintSet, r: usize) -> Result<Vec<Mat>> {
    if !supports_enumeration(omega, r) {
        return Err(Error::arg(format!(
            "enumeration needs a discrete Γ_r; {omega} with r={r} is not supported"
        )));
    }
    let n = omega.rows();
    let mut out = Vec::new();
    for bits in 0u32..(1u32 << (n - 1)) {
        let x = DVector::from_fn(n, |i, _| {
            if i == 0 {
                return 1.0;
            }
            let on = bits >> (i - 1) & 1 == 1;
            match omega.family() {
                Family::QuadDiag => {
                    if on {
                        1.0
                    } else {
                        0.0
                    }
                }
                _ => {
                    if on {
                        -1.0
                    } else {
                        1.0
                    }
                }
            }
        });
        let xx = &x * x.transpose();
        if let Family::BinaryQp { a, b } = omega.family() {
            let feasible = a
                .iter()
                .zip(b)
                .all(|(ai, bi)| ai.dot(&xx) <= bi + 1e-9 * (1.0 + bi.abs()));
            if !feasible {
                continue;
            }
        }
        out.push(xx);
    }
    if out.is_empty() {
        return Err(Error::Precondition("Γ_r is empty for this instance".into()));
    }
    Ok(out)
}

/// Reusable nearest-point oracle; enumeration results are computed once.
pub struct GammaOracle<'a> {
    omega: &'a ConstraintSet,
    r: usize,
    opts: GammaOptions,
    points: Option<Vec<Mat>>,
}

impl<'a> GammaOracle<'a> {
    pub fn new(omega: &'a ConstraintSet, r: usize, opts: GammaOptions) -> Result<Self> {
        if r == 0 || r > omega.rows() {
            return Err(Error::arg(format!("rank index r={r} outside 1..={}", omega.rows())));
        }
        let points = match opts.method {
            GammaMethod::Enumerate => Some(enumerate_mat(omega, r)?),
            GammaMethod::Alternating => None,
        };
        Ok(GammaOracle {
            omega,
            r,
            opts,
            points,
        })
    }

    /// Best point found and its distance to `x`.
    pub(crate) fn nearest(&self, x: &Mat) -> Result<(f64, Mat)> {
        if let Some(points) = &self.points {
            let mut best: Option<(f64, &Mat)> = None;
            for p in points {
                let d = (x - p).norm();
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, p));
                }
            }
            let (d, p) = best.expect("nonempty enumeration");
            return Ok((d, p.clone()));
        }
        if let Some(p) = self.closed_form(x)? {
            return Ok(((x - &p).norm(), p));
        }
        let scale = if x.norm() > 0.0 { x.norm() } else { 1.0 };
        let mut best: Option<(f64, Mat)> = None;
        for k in 0..self.opts.restarts.max(1) {
            let start = if k == 0 {
                x.clone()
            } else {
                let mut g = rng::stream(self.opts.seed, k as u64);
                let d = rng::gaussian_like(x.shape(), self.omega.is_symmetric(), &mut g);
                let radius = RADII[(k - 1) % RADII.len()] * scale;
                let dn = d.norm().max(f64::MIN_POSITIVE);
                x + d * (radius / dn)
            };
            if let Some(y) = self.alternate(&start)? {
                let d = (x - &y).norm();
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, y));
                }
            }
        }
        best.ok_or_else(|| {
            Error::NonConvergence {
                what: "alternating projections onto Γ_r".into(),
                iterations: AP_MAX_ITERS,
                residual: f64::NAN,
            }
        })
    }

    /// Γ_r is itself a rank set for these families.
    fn closed_form(&self, x: &Mat) -> Result<Option<Mat>> {
        let r = self.r;
        Ok(match self.omega.family() {
            Family::Ambient => Some(if self.omega.is_symmetric() {
                crate::matrix::symmetrize(&rank_truncate(x, r)?)
            } else {
                rank_truncate(x, r)?
            }),
            Family::RankSet { r: s } => Some(rank_truncate(x, r.min(*s))?),
            Family::PsdRankSet { r: s } => Some(psd_rank_truncate(x, r.min(*s))?),
            Family::PsdCone => Some(psd_rank_truncate(x, r)?),
            // Unitarily invariant: keep the top r values and project them
            // onto the matching vector set.
            Family::NormBall { norm, radius } => Some(if self.omega.psd_intersected() {
                let t = psd_rank_truncate(x, r)?;
                super::project::project_psd_ball(&t, *norm, *radius)?
            } else {
                let t = rank_truncate(x, r)?;
                super::project::project_ball(&t, *norm, *radius, self.omega.is_symmetric())?
            }),
            Family::FrobeniusSphere { radius } => {
                let t = rank_truncate(x, r)?;
                let f = t.norm();
                if f > 0.0 {
                    let t = t * (radius / f);
                    Some(if self.omega.is_symmetric() {
                        crate::matrix::symmetrize(&t)
                    } else {
                        t
                    })
                } else {
                    None
                }
            }
            _ => None,
        })
    }

    /// One alternating-projection run; returns a point of Γ_r or `None`.
    fn alternate(&self, start: &Mat) -> Result<Option<Mat>> {
        let omega = self.omega;
        let mut y = omega.project_rank_side(start, self.r)?;
        for _ in 0..AP_MAX_ITERS {
            let z = omega.project_xi_mat(&y, 1e-12)?;
            let y2 = omega.project_rank_side(&z, self.r)?;
            let gap = (&z - &y2).norm();
            let moved = (&y2 - &y).norm();
            y = y2;
            if gap <= 1e-13 * (1.0 + y.norm()) || moved <= 1e-16 * (1.0 + y.norm()) {
                break;
            }
        }
        let res = omega.residual_xi_mat(&y)?;
        Ok((res <= ACCEPT_TOL).then_some(y))
    }
}

pub fn nearest_in_gamma(
    omega: &ConstraintSet,
    r: usize,
    x: &Matrix,
    opts: GammaOptions,
) -> Result<(f64, Matrix)> {
    omega.check(x, "X")?;
    let oracle = GammaOracle::new(omega, r, opts)?;
    let (d, p) = oracle.nearest(x.as_dmatrix())?;
    Ok((d, omega.wrap(p)))
}

/// Upper estimate of dist(X, Γ_r); exact for `Enumerate`.
pub fn dist_to_gamma(omega: &ConstraintSet, r: usize, x: &Matrix, opts: GammaOptions) -> Result<f64> {
    Ok(nearest_in_gamma(omega, r, x, opts)?.0)
}
