use serde::Serialize;

use crate::error::Result;
use crate::linalg;
use crate::matrix::{Mat, Matrix};
use crate::rng;
use crate::spectral::{self, DEFAULT_RANK_EPS};

use super::continuation::{local_probe_mat, LocalProbe};
use super::dca::{self, Model, Settings};
use super::objective::ProblemSpec;
use super::{penalty_term, PenaltyConfig, PenaltyKind};

const FEASIBLE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct SolveIter {
    pub iter: usize,
    /// Objective the solver descends (ε-smoothed for Schatten-p).
    pub objective: f64,
    pub f: f64,
    /// Exact penalty term, unweighted.
    pub penalty: f64,
    pub theta: f64,
    pub rank: usize,
    pub step: f64,
    pub halvings: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveTrace {
    pub kind: &'static str,
    pub rho: f64,
    pub eps_smooth: Option<f64>,
    pub iterates: Vec<SolveIter>,
    pub x: Matrix,
    pub f: f64,
    pub objective: f64,
    pub theta: f64,
    pub rank: usize,
    pub converged: bool,
    pub iterations: usize,
    pub feasible: bool,
    pub local_probe: Option<LocalProbe>,
}

impl SolveTrace {
    /// iter, f, penalty, θ_r, rank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,objective,f,penalty,theta,rank,step,halvings\n");
        for it in &self.iterates {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{}\n",
                it.iter, it.objective, it.f, it.penalty, it.theta, it.rank, it.step, it.halvings
            ));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct DcStep {
    pub x: Matrix,
    pub objective: f64,
    pub step: f64,
    pub halvings: usize,
}

/// ε-smoothed Schatten tail Σ_{i>r} [(σ_i + ε)^p − ε^p].
fn smoothed_tail(sigma: &[f64], r: usize, p: f64, eps: f64) -> f64 {
    sigma
        .iter()
        .skip(r)
        .map(|s| (s + eps).powf(p) - eps.powf(p))
        .sum()
}

pub(crate) fn penalty_model<'a>(
    problem: &'a ProblemSpec,
    kind: PenaltyKind,
    rho: f64,
    eps: f64,
) -> Model<'a> {
    let r = problem.r;
    let dim = problem.set.rows().max(problem.set.cols());
    Model {
        total: Box::new(move |x: &Mat| {
            let sigma = linalg::singular_values(x)?;
            let term = match kind {
                PenaltyKind::SchattenP { p } => smoothed_tail(&sigma, r, p, eps),
                other => penalty_term(other, &sigma, r, dim),
            };
            Ok(problem.objective.value_mat(x) + rho * term)
        }),
        linearize: Box::new(move |x: &Mat| {
            let (u, s, v) = linalg::svd(x)?;
            let (a, g) = match kind {
                PenaltyKind::DcKyfan => {
                    (1.0, (0..s.len()).map(|i| if i < r { 1.0 } else { 0.0 }).collect())
                }
                PenaltyKind::TruncatedDiff => (1.0, spectral::hr_weights(&s, r)),
                PenaltyKind::SchattenP { p } => {
                    // Σ_{i>r} w_i σ_i = w_n‖X‖_* − Σ (w_n − w_i) σ_i with
                    // w nondecreasing in i, so the subtracted part is convex.
                    let w: Vec<f64> = s
                        .iter()
                        .enumerate()
                        .map(|(i, &si)| if i < r { 0.0 } else { p * (si + eps).powf(p - 1.0) })
                        .collect();
                    let wn = w.last().copied().unwrap_or(0.0);
                    (wn, w.iter().map(|wi| wn - wi).collect::<Vec<f64>>())
                }
            };
            Ok((rho * a, linalg::recompose(&u, &g, &v) * rho))
        }),
    }
}

pub(crate) fn default_step(problem: &ProblemSpec, config: &PenaltyConfig) -> Result<f64> {
    if let Some(t) = config.step {
        return Ok(t);
    }
    let l = problem.objective.lipschitz()?;
    Ok(if l > 0.0 { 0.95 / l } else { 1.0 })
}

/// One proximal DC step from X_k with the configured step size.
pub fn dc_step(problem: &ProblemSpec, config: &PenaltyConfig, x: &Matrix) -> Result<DcStep> {
    config.validate()?;
    problem.set.check(x, "X")?;
    let model = penalty_model(problem, config.kind, config.rho, config.eps_smooth);
    let xm = x.as_dmatrix();
    let fx = (model.total)(xm)?;
    let step0 = default_step(problem, config)?;
    let out = dca::step(problem, &model, xm, fx, step0, config.inner_tol)?;
    Ok(DcStep {
        x: problem.set.wrap(out.x),
        objective: out.value,
        step: out.step,
        halvings: out.halvings,
    })
}

/// Random start: a seeded Gaussian projected onto Ω.
pub(crate) fn random_start(problem: &ProblemSpec, seed: u64) -> Result<Mat> {
    let mut g = rng::stream(seed, 0);
    let z = rng::gaussian_like(problem.set.shape(), problem.set.is_symmetric(), &mut g);
    problem.set.project_mat(&z, 1e-12)
}

/// Proximal DC method for f + ρ·(penalty). Starts from `x0`, or from a
/// seeded random point of Ω.
pub fn solve(
    problem: &ProblemSpec,
    config: &PenaltyConfig,
    x0: Option<&Matrix>,
    seed: u64,
) -> Result<SolveTrace> {
    config.validate()?;
    let start = match x0 {
        Some(x) => {
            problem.set.check(x, "X0")?;
            x.as_dmatrix().clone()
        }
        None => random_start(problem, seed)?,
    };
    solve_from(problem, config, config.rho, &start, config.eps_smooth, seed)
}

pub(crate) fn solve_from(
    problem: &ProblemSpec,
    config: &PenaltyConfig,
    rho: f64,
    start: &Mat,
    eps: f64,
    seed: u64,
) -> Result<SolveTrace> {
    let model = penalty_model(problem, config.kind, rho, eps);
    let settings = Settings {
        step: default_step(problem, config)?,
        inner_tol: config.inner_tol,
        outer_tol: config.outer_tol,
        max_iters: config.max_iters,
        lower_bound: problem.objective.lower_bound(&problem.set),
    };
    let r = problem.r;
    let dim = problem.set.rows().max(problem.set.cols());
    let mut iterates = Vec::new();
    let out = dca::run(problem, &model, start, settings, |iter, x, value, step, halvings| {
        let sigma = linalg::singular_values(x)?;
        iterates.push(SolveIter {
            iter,
            objective: value,
            f: problem.objective.value_mat(x),
            penalty: penalty_term(config.kind, &sigma, r, dim),
            theta: spectral::theta_of(&sigma, r),
            rank: spectral::rank_of(&sigma, DEFAULT_RANK_EPS),
            step,
            halvings,
        });
        Ok(())
    })?;
    let sigma = linalg::singular_values(&out.x)?;
    let rank = spectral::rank_of(&sigma, DEFAULT_RANK_EPS);
    let feasible = rank <= r && problem.set.residual_mat(&out.x)? <= FEASIBLE_TOL;
    let local_probe = if feasible {
        Some(local_probe_mat(problem, &out.x, seed)?)
    } else {
        None
    };
    Ok(SolveTrace {
        kind: config.kind.name(),
        rho,
        eps_smooth: matches!(config.kind, PenaltyKind::SchattenP { .. }).then_some(eps),
        iterates,
        f: problem.objective.value_mat(&out.x),
        objective: out.value,
        theta: spectral::theta_of(&sigma, r),
        rank,
        converged: out.converged,
        iterations: out.iterations,
        feasible,
        local_probe,
        x: problem.set.wrap(out.x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::Objective;
    use crate::sets::ConstraintSet;

    fn maxcut2() -> ProblemSpec {
        let l = Matrix::symmetric(2, &[1.0, -1.0, -1.0, 1.0]).unwrap();
        ProblemSpec::new(Objective::linear(&l), ConstraintSet::correlation(2).unwrap(), 1).unwrap()
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let p = maxcut2();
        let c = PenaltyConfig {
            rho: 4.0,
            ..Default::default()
        };
        let x = Matrix::symmetric(2, &[1.0; 4]).unwrap();
        let s = dc_step(&p, &c, &x).unwrap();
        assert!(s.x.sub(&x).unwrap().fro_norm() < 1e-8);
    }

    #[test]
    fn one_step_from_identity_descends() {
        let p = maxcut2();
        let c = PenaltyConfig {
            rho: 4.0,
            ..Default::default()
        };
        let x = Matrix::identity(2);
        let before = super::super::penalty_value(&p, &c, &x).unwrap();
        let s = dc_step(&p, &c, &x).unwrap();
        assert!(super::super::penalty_value(&p, &c, &s.x).unwrap() < before);
    }

    #[test]
    fn maxcut_two_solves_to_rank_one() {
        let p = maxcut2();
        let c = PenaltyConfig {
            rho: 4.0,
            ..Default::default()
        };
        let t = solve(&p, &c, Some(&Matrix::identity(2)), 0).unwrap();
        assert!(t.theta <= 1e-6, "theta {}", t.theta);
        let ones = Matrix::symmetric(2, &[1.0; 4]).unwrap();
        assert!(t.x.sub(&ones).unwrap().fro_norm() < 1e-4);
        for w in t.iterates.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-12);
        }
        assert!(t.local_probe.as_ref().unwrap().passed);
    }

    #[test]
    fn rho_zero_is_the_convex_solve() {
        let p = maxcut2();
        let c = PenaltyConfig {
            rho: 0.0,
            ..Default::default()
        };
        let t = solve(&p, &c, None, 3).unwrap();
        assert!(t.f.abs() < 1e-6, "f {}", t.f);
    }

    #[test]
    fn random_starts_agree_below_the_trap_level() {
        // Along [[1,c],[c,1]] the objective is 2 − 2c + ρ(1 − |c|); for ρ > 2
        // starts with c < 0 descend to c = −1 instead.
        let p = maxcut2();
        let c = PenaltyConfig {
            rho: 1.0,
            ..Default::default()
        };
        let vals: Vec<f64> = (0..8).map(|s| solve(&p, &c, None, s).unwrap().objective).collect();
        for v in &vals {
            assert!((v - vals[0]).abs() < 1e-6, "{vals:?}");
        }
    }
}
