//! Proximal DC outer loop shared by the penalty and surrogate solvers.
//!
//! The objective F is majorized at X_k by f + a‖X‖_* − <W, X> + const; one
//! step minimizes the linearized f plus the prox term over Ω.

use crate::error::{Error, Result};
use crate::matrix::{symmetrize, Mat};

use super::objective::ProblemSpec;
use super::prox::prox_mat;

const MAX_HALVINGS: usize = 40;
const INNER_FLOOR: f64 = 1e-12;
const DIVERGENCE_SLACK: f64 = 1e-6;

type Linearization<'a> = Box<dyn Fn(&Mat) -> Result<(f64, Mat)> + Sync + 'a>;
type TotalObjective<'a> = Box<dyn Fn(&Mat) -> Result<f64> + Sync + 'a>;

pub(crate) struct Model<'a> {
    pub total: TotalObjective<'a>,
    /// (a, W) of the majorization at the given point.
    pub linearize: Linearization<'a>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Settings {
    pub step: f64,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub max_iters: usize,
    pub lower_bound: Option<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct StepOut {
    pub x: Mat,
    pub value: f64,
    pub step: f64,
    pub halvings: usize,
    pub moved: bool,
}

/// One majorize-minimize step; halves the step until F does not increase.
/// After `MAX_HALVINGS` failures the point is kept.
pub(crate) fn step(
    problem: &ProblemSpec,
    model: &Model<'_>,
    x: &Mat,
    fx: f64,
    step0: f64,
    inner_tol: f64,
) -> Result<StepOut> {
    let (a, w) = (model.linearize)(x)?;
    let mut dir = problem.gradient(x) - w;
    if problem.set.is_symmetric() {
        dir = symmetrize(&dir);
    }
    let mut t = step0;
    for halvings in 0..=MAX_HALVINGS {
        let z = x - &dir * t;
        let next = prox_mat(&problem.set, &z, t * a, inner_tol)?;
        let value = (model.total)(&next)?;
        if value <= fx {
            return Ok(StepOut {
                x: next,
                value,
                step: t,
                halvings,
                moved: true,
            });
        }
        t *= 0.5;
    }
    Ok(StepOut {
        x: x.clone(),
        value: fx,
        step: t,
        halvings: MAX_HALVINGS,
        moved: false,
    })
}

pub(crate) struct RunOut {
    pub x: Mat,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Runs from the projection of `x0` onto Ω. `record` sees every accepted
/// iterate, starting with iteration 0.
pub(crate) fn run(
    problem: &ProblemSpec,
    model: &Model<'_>,
    x0: &Mat,
    settings: Settings,
    mut record: impl FnMut(usize, &Mat, f64, f64, usize) -> Result<()>,
) -> Result<RunOut> {
    let mut x = problem.set.project_mat(x0, settings.inner_tol.min(1e-10))?;
    let mut fx = (model.total)(&x)?;
    record(0, &x, fx, 0.0, 0)?;
    let mut last_decrease = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=settings.max_iters {
        iterations = k;
        let inner = settings.inner_tol.min(0.1 * last_decrease).max(INNER_FLOOR);
        let out = step(problem, model, &x, fx, settings.step, inner)?;
        if let Some(lb) = settings.lower_bound {
            if out.value < lb - DIVERGENCE_SLACK {
                return Err(Error::Divergence(format!(
                    "objective {:.6e} fell below the lower bound {lb:.6e} of f",
                    out.value
                )));
            }
        }
        let decrease = fx - out.value;
        record(k, &out.x, out.value, out.step, out.halvings)?;
        x = out.x;
        fx = out.value;
        if !out.moved || decrease <= settings.outer_tol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
        last_decrease = decrease;
    }
    Ok(RunOut {
        x,
        value: fx,
        converged,
        iterations,
    })
}
