//! ρ-continuation, the enumeration oracle for the constrained problem and a
//! local-optimality probe at feasible outputs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{Mat, Matrix};
use crate::rng;
use crate::sets::{enumerate_mat, supports_enumeration, GammaMethod, GammaOptions, GammaOracle};

use super::objective::ProblemSpec;
use super::solve::{random_start, solve_from};
use super::{PenaltyConfig, PenaltyKind};

const PROBE_DIRECTIONS: usize = 16;
const PROBE_RADIUS: f64 = 1e-3;
const PROBE_SLACK: f64 = 1e-8;
const MATCH_TOL: f64 = 1e-6;
const THETA_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct LocalProbe {
    pub directions: usize,
    pub radius: f64,
    /// Smallest f(Y) − f(X) over the probed points of Γ_r.
    pub min_change: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleOptimum {
    pub objective: f64,
    pub point: Matrix,
    pub method: &'static str,
    pub candidates: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationEntry {
    pub rho: f64,
    pub f: f64,
    pub objective: f64,
    pub theta: f64,
    pub rank: usize,
    pub iterations: usize,
    pub converged: bool,
    pub eps_smooth: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactPenaltyReport {
    pub kind: &'static str,
    pub schedule: Vec<f64>,
    pub entries: Vec<ContinuationEntry>,
    /// Smallest ρ whose output has numeric rank ≤ r.
    pub threshold_rho: Option<f64>,
    pub threshold_f: Option<f64>,
    /// Smallest ρ whose output has θ_r ≤ 1e-6 and f within 1e-6 of the oracle.
    pub matching_rho: Option<f64>,
    pub oracle: Option<OracleOptimum>,
    pub matches_oracle: Option<bool>,
    pub failure: bool,
    pub diagnostics: Vec<String>,
    pub final_x: Matrix,
    pub seed: u64,
}

/// Global minimum of f over Γ_r by enumeration, when Γ_r is discrete.
pub fn constrained_optimum(problem: &ProblemSpec) -> Result<Option<OracleOptimum>> {
    if !supports_enumeration(&problem.set, problem.r) {
        return Ok(None);
    }
    let points = enumerate_mat(&problem.set, problem.r)?;
    let candidates = points.len();
    let (value, best) = points
        .into_iter()
        .map(|p| (problem.objective.value_mat(&p), p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("enumeration is nonempty");
    Ok(Some(OracleOptimum {
        objective: value,
        point: problem.set.wrap(best),
        method: "enumerate",
        candidates,
    }))
}

/// Warm-started solves along the schedule. The Schatten smoothing ε halves
/// at every stage.
pub fn rho_continuation(
    problem: &ProblemSpec,
    config: &PenaltyConfig,
    x0: Option<&Matrix>,
    seed: u64,
) -> Result<ExactPenaltyReport> {
    config.validate()?;
    if config.rho_schedule.is_empty() {
        return Err(Error::arg("rho schedule is empty"));
    }
    let mut x = match x0 {
        Some(x) => {
            problem.set.check(x, "X0")?;
            x.as_dmatrix().clone()
        }
        None => random_start(problem, seed)?,
    };
    let oracle = constrained_optimum(problem)?;
    let mut eps = config.eps_smooth;
    let mut entries = Vec::new();
    let mut diagnostics = Vec::new();
    let (mut threshold_rho, mut threshold_f, mut matching_rho) = (None, None, None);
    for &rho in &config.rho_schedule {
        let trace = solve_from(problem, config, rho, &x, eps, seed)?;
        x = trace.x.as_dmatrix().clone();
        if let PenaltyKind::SchattenP { .. } = config.kind {
            let sigma = linalg::singular_values(&x)?;
            let tail: Vec<String> = sigma
                .iter()
                .skip(problem.r)
                .map(|s| format!("{s:.3e}"))
                .collect();
            let below = sigma.iter().skip(problem.r).all(|&s| s < 1.0);
            diagnostics.push(format!(
                "rho={rho}: tail singular values [{}] {} 1",
                tail.join(", "),
                if below { "all below" } else { "not all below" }
            ));
        }
        if trace.rank <= problem.r && threshold_rho.is_none() {
            threshold_rho = Some(rho);
            threshold_f = Some(trace.f);
        }
        if let Some(o) = &oracle {
            if matching_rho.is_none()
                && trace.theta <= THETA_TOL
                && (trace.f - o.objective).abs() <= MATCH_TOL
            {
                matching_rho = Some(rho);
            }
        }
        entries.push(ContinuationEntry {
            rho,
            f: trace.f,
            objective: trace.objective,
            theta: trace.theta,
            rank: trace.rank,
            iterations: trace.iterations,
            converged: trace.converged,
            eps_smooth: trace.eps_smooth,
        });
        if matches!(config.kind, PenaltyKind::SchattenP { .. }) {
            eps *= 0.5;
        }
    }
    let matches_oracle = match (&oracle, threshold_f) {
        (Some(o), Some(f)) => Some((f - o.objective).abs() <= MATCH_TOL),
        _ => None,
    };
    if threshold_rho.is_none() {
        diagnostics.push("no schedule entry reached numeric rank <= r".into());
    }
    Ok(ExactPenaltyReport {
        kind: config.kind.name(),
        schedule: config.rho_schedule.clone(),
        entries,
        failure: threshold_rho.is_none(),
        threshold_rho,
        threshold_f,
        matching_rho,
        oracle,
        matches_oracle,
        diagnostics,
        final_x: problem.set.wrap(x),
        seed,
    })
}

/// Compares f at X with f at nearby points of Γ_r reached by retracting
/// random perturbations X + tD onto Γ_r.
pub fn local_probe(problem: &ProblemSpec, x: &Matrix, seed: u64) -> Result<LocalProbe> {
    problem.set.check(x, "X")?;
    local_probe_mat(problem, x.as_dmatrix(), seed)
}

pub(crate) fn local_probe_mat(problem: &ProblemSpec, x: &Mat, seed: u64) -> Result<LocalProbe> {
    let set = &problem.set;
    let method = if supports_enumeration(set, problem.r) {
        GammaMethod::Enumerate
    } else {
        GammaMethod::Alternating
    };
    let oracle = GammaOracle::new(
        set,
        problem.r,
        GammaOptions {
            method,
            restarts: 1,
            seed,
        },
    )?;
    let fx = problem.objective.value_mat(x);
    let radius = PROBE_RADIUS * x.norm().max(1.0);
    let mut min_change = f64::INFINITY;
    for k in 0..PROBE_DIRECTIONS {
        let mut g = rng::stream(seed, 1 + k as u64);
        let d = rng::gaussian_like(set.shape(), set.is_symmetric(), &mut g);
        let y = x + &d * (radius / d.norm().max(f64::MIN_POSITIVE));
        let (_, p) = oracle.nearest(&y)?;
        min_change = min_change.min(problem.objective.value_mat(&p) - fx);
    }
    Ok(LocalProbe {
        directions: PROBE_DIRECTIONS,
        radius,
        min_change,
        passed: min_change >= -PROBE_SLACK * fx.abs().max(1.0),
    })
}
