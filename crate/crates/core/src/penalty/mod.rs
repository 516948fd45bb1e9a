//! Exact-penalty objectives over Ω and a proximal DC solver with
//! ρ-continuation.
//!
//! Three penalty terms are supported: ρ·θ_r (Ky-Fan difference), ρ·Σ_{i>r}σ_i^p
//! (Schatten tail) and ρ·η_r (truncated difference).

mod continuation;
pub mod io;
pub(crate) mod dca;
mod objective;
mod prox;
pub(crate) mod solve;

pub use continuation::{
    constrained_optimum, local_probe, rho_continuation, ContinuationEntry, ExactPenaltyReport,
    LocalProbe, OracleOptimum,
};
pub use objective::{Objective, ProblemSpec};
pub use prox::composite_prox;
pub use solve::{dc_step, solve, DcStep, SolveIter, SolveTrace};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::spectral;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PenaltyKind {
    DcKyfan,
    SchattenP { p: f64 },
    TruncatedDiff,
}

impl PenaltyKind {
    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::DcKyfan => "dc-kyfan",
            PenaltyKind::SchattenP { .. } => "schatten-p",
            PenaltyKind::TruncatedDiff => "truncated-diff",
        }
    }

    /// Accepts `dc`, `dc-kyfan`, `truncated`, `truncated-diff` and
    /// `schatten-p` (with `p`).
    pub fn parse(s: &str, p: Option<f64>) -> Result<Self> {
        match s {
            "dc" | "dc-kyfan" => Ok(PenaltyKind::DcKyfan),
            "truncated" | "truncated-diff" => Ok(PenaltyKind::TruncatedDiff),
            "schatten" | "schatten-p" => {
                let p = p.unwrap_or(0.5);
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::arg(format!("Schatten exponent p={p} outside (0,1)")));
                }
                Ok(PenaltyKind::SchattenP { p })
            }
            other => Err(Error::arg(format!("unknown penalty kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PenaltyConfig {
    pub kind: PenaltyKind,
    pub rho: f64,
    pub rho_schedule: Vec<f64>,
    /// `None` uses 0.95/L, or 1 when f is linear.
    pub step: Option<f64>,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub max_iters: usize,
    /// Smoothing ε for the Schatten majorization.
    pub eps_smooth: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            kind: PenaltyKind::DcKyfan,
            rho: 1.0,
            rho_schedule: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
            step: None,
            inner_tol: 1e-8,
            outer_tol: 1e-12,
            max_iters: 2000,
            eps_smooth: 1e-6,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::arg(format!("rho must be nonnegative, got {}", self.rho)));
        }
        if self.rho_schedule.windows(2).any(|w| w[1] <= w[0])
            || self.rho_schedule.iter().any(|r| !(*r >= 0.0 && r.is_finite()))
        {
            return Err(Error::arg("rho schedule must be strictly increasing and nonnegative"));
        }
        if let Some(t) = self.step {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::arg(format!("step must be positive, got {t}")));
            }
        }
        for (name, v) in [
            ("inner_tol", self.inner_tol),
            ("outer_tol", self.outer_tol),
            ("eps_smooth", self.eps_smooth),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::arg("max_iters must be positive"));
        }
        if let PenaltyKind::SchattenP { p } = self.kind {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::arg(format!("Schatten exponent p={p} outside (0,1)")));
            }
        }
        Ok(())
    }
}

/// Unweighted penalty term at sorted singular values.
pub(crate) fn penalty_term(kind: PenaltyKind, sigma: &[f64], r: usize, dim: usize) -> f64 {
    match kind {
        PenaltyKind::DcKyfan => spectral::theta_of(sigma, r),
        PenaltyKind::TruncatedDiff => spectral::truncated_of(sigma, r).1,
        PenaltyKind::SchattenP { p } => spectral::schatten_tail_of(sigma, r, p, dim),
    }
}

/// f(X) + ρ·(penalty term).
pub fn penalty_value(problem: &ProblemSpec, config: &PenaltyConfig, x: &Matrix) -> Result<f64> {
    problem.set.check(x, "X")?;
    let f = problem.objective.value(x)?;
    let sigma = spectral::singular_values(x)?;
    let dim = x.rows().max(x.cols());
    Ok(f + config.rho * penalty_term(config.kind, &sigma, problem.r, dim))
}
