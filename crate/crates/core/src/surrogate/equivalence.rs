//! Global estimates of the surrogate minimum along a ρ schedule, compared
//! with an exact oracle for min f + ν·rank on small correlation sets.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{Mat, Matrix};
use crate::penalty::dca::{self, Model, Settings};
use crate::penalty::solve::{random_start, solve_from};
use crate::penalty::{PenaltyConfig, ProblemSpec};
use crate::sets::{enumerate_mat, Family};
use crate::spectral::{self, DEFAULT_RANK_EPS};

use super::{capped_term, SurrogateFamily};

const MATCH_TOL: f64 = 1e-6;
const GRID_POINTS: usize = 10_000;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EquivalenceBudget {
    pub starts: usize,
    pub max_iters: usize,
    pub inner_tol: f64,
    pub outer_tol: f64,
}

impl Default for EquivalenceBudget {
    fn default() -> Self {
        EquivalenceBudget {
            starts: 8,
            max_iters: 2000,
            inner_tol: 1e-8,
            outer_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularizedOracle {
    pub objective: f64,
    pub rank: usize,
    pub point: Matrix,
    pub method: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceEntry {
    pub rho: f64,
    /// Smallest surrogate value over the starts.
    pub surrogate: f64,
    pub f: f64,
    pub rank: usize,
    /// f + ν·rank at the best point.
    pub regularized: f64,
    pub converged_starts: usize,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub family: &'static str,
    pub t_star: f64,
    pub nu: f64,
    pub schedule: Vec<f64>,
    pub starts: usize,
    pub oracle: RegularizedOracle,
    pub entries: Vec<EquivalenceEntry>,
    pub matching_rho: Option<f64>,
    pub matching_point: Option<Matrix>,
    pub seed: u64,
}

fn corr2(c: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[1.0, c, c, 1.0])
}

/// Minimizer of a convex function on [lo, hi] by golden section.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-13 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Exact min of f + ν·rank over a correlation set with n ∈ {2, 3}.
///
/// Rank-1 points are enumerated. For n = 2 the rank-2 points form the open
/// segment c ∈ (−1, 1), scanned on a grid and refined by golden section.
/// For n = 3 the rank ≥ 2 part is bounded below by the convex minimum plus
/// 2ν; the oracle refuses when that bound is not attained.
pub fn rank_regularized_optimum(problem: &ProblemSpec) -> Result<RegularizedOracle> {
    let n = problem.set.rows();
    if !matches!(problem.set.family(), Family::Correlation) || !(2..=3).contains(&n) {
        return Err(Error::Refused(format!(
            "no rank-regularized oracle for {} (correlation sets with n <= 3 only)",
            problem.set
        )));
    }
    let nu = problem.nu;
    let f = |x: &Mat| problem.objective.value_mat(x);
    let (f1, x1) = enumerate_mat(&problem.set, 1)?
        .into_iter()
        .map(|p| (f(&p), p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("rank-one enumeration is nonempty");
    let rank_one = |method| RegularizedOracle {
        objective: f1 + nu,
        rank: 1,
        point: problem.set.wrap(x1.clone()),
        method,
    };
    if n == 2 {
        let h = 2.0 / GRID_POINTS as f64;
        let g = |c: f64| f(&corr2(c));
        let best = (1..GRID_POINTS)
            .map(|i| -1.0 + i as f64 * h)
            .min_by(|a, b| g(*a).total_cmp(&g(*b)))
            .expect("grid is nonempty");
        let c = golden_min(g, (best - h).max(-1.0), (best + h).min(1.0));
        let c = if g(c) <= g(best) { c } else { best };
        let interior = (g(c) + 2.0 * nu, c);
        if f1 + nu <= interior.0 || c.abs() >= 1.0 {
            return Ok(rank_one("enumerate+grid"));
        }
        return Ok(RegularizedOracle {
            objective: interior.0,
            rank: 2,
            point: problem.set.wrap(corr2(interior.1)),
            method: "enumerate+grid",
        });
    }
    let config = PenaltyConfig {
        rho: 0.0,
        ..PenaltyConfig::default()
    };
    let start = problem.set.project_mat(&Mat::identity(n, n), 1e-12)?;
    let convex = solve_from(problem, &config, 0.0, &start, config.eps_smooth, 0)?;
    let fc = convex.f;
    if f1 + nu <= fc + 2.0 * nu {
        return Ok(rank_one("enumerate+convex-bound"));
    }
    if convex.rank == 2 {
        return Ok(RegularizedOracle {
            objective: fc + 2.0 * nu,
            rank: 2,
            point: convex.x,
            method: "enumerate+convex-bound",
        });
    }
    Err(Error::Refused(format!(
        "oracle inconclusive: rank-1 value {:.6e} exceeds the rank-2 bound {:.6e} and the convex minimizer has rank {}",
        f1 + nu,
        fc + 2.0 * nu,
        convex.rank
    )))
}

pub(crate) fn surrogate_model<'a>(
    problem: &'a ProblemSpec,
    family: &'a SurrogateFamily,
    rho: f64,
) -> Model<'a> {
    let nu = problem.nu;
    Model {
        total: Box::new(move |x: &Mat| {
            let sigma = linalg::singular_values(x)?;
            let term: f64 = sigma.iter().map(|&s| capped_term(family, rho, s)).sum();
            Ok(problem.objective.value_mat(x) + nu * term)
        }),
        linearize: Box::new(move |x: &Mat| {
            let (u, s, v) = linalg::svd(x)?;
            let g: Vec<f64> = s.iter().map(|&si| family.psi_subgradient(rho * si)).collect();
            Ok((nu * rho, linalg::recompose(&u, &g, &v) * (nu * rho)))
        }),
    }
}

struct StartResult {
    x: Mat,
    value: f64,
    converged: bool,
}

fn run_start(
    problem: &ProblemSpec,
    family: &SurrogateFamily,
    rho: f64,
    start: &Mat,
    settings: Settings,
) -> Result<StartResult> {
    let model = surrogate_model(problem, family, rho);
    let out = dca::run(problem, &model, start, settings, |_, _, _, _, _| Ok(()))?;
    Ok(StartResult {
        x: out.x,
        value: out.value,
        converged: out.converged,
    })
}

/// Multi-start DCA on the surrogate for every ρ, compared with
/// [`rank_regularized_optimum`].
pub fn equivalence_report(
    problem: &ProblemSpec,
    family: &SurrogateFamily,
    schedule: &[f64],
    budget: EquivalenceBudget,
    seed: u64,
) -> Result<EquivalenceReport> {
    if schedule.is_empty() || schedule.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::arg("rho schedule must be nonempty with positive entries"));
    }
    if budget.starts == 0 || budget.max_iters == 0 {
        return Err(Error::arg("budget needs at least one start and one iteration"));
    }
    let oracle = rank_regularized_optimum(problem)?;
    let l = problem.objective.lipschitz()?;
    let settings = Settings {
        step: if l > 0.0 { 0.95 / l } else { 1.0 },
        inner_tol: budget.inner_tol,
        outer_tol: budget.outer_tol,
        max_iters: budget.max_iters,
        lower_bound: problem.objective.lower_bound(&problem.set),
    };
    let starts: Vec<Mat> = (0..budget.starts as u64)
        .map(|k| random_start(problem, seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..schedule.len())
        .flat_map(|i| (0..starts.len()).map(move |k| (i, k)))
        .collect();
    let results: Vec<StartResult> = jobs
        .par_iter()
        .map(|&(i, k)| run_start(problem, family, schedule[i], &starts[k], settings))
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    let (mut matching_rho, mut matching_point) = (None, None);
    for (i, &rho) in schedule.iter().enumerate() {
        let runs = &results[i * starts.len()..(i + 1) * starts.len()];
        let best = runs
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("at least one start");
        let sigma = linalg::singular_values(&best.x)?;
        let rank = spectral::rank_of(&sigma, DEFAULT_RANK_EPS);
        let f = problem.objective.value_mat(&best.x);
        let matches = (best.value - oracle.objective).abs() <= MATCH_TOL && rank == oracle.rank;
        if matches && matching_rho.is_none() {
            matching_rho = Some(rho);
            matching_point = Some(problem.set.wrap(best.x.clone()));
        }
        entries.push(EquivalenceEntry {
            rho,
            surrogate: best.value,
            f,
            rank,
            regularized: f + problem.nu * rank as f64,
            converged_starts: runs.iter().filter(|r| r.converged).count(),
            matches,
        });
    }
    Ok(EquivalenceReport {
        family: family.tag(),
        t_star: family.t_star(),
        nu: problem.nu,
        schedule: schedule.to_vec(),
        starts: budget.starts,
        oracle,
        entries,
        matching_rho,
        matching_point,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::Objective;
    use crate::sets::ConstraintSet;

    fn maxcut2(nu: f64) -> ProblemSpec {
        let l = Matrix::symmetric(2, &[1.0, -1.0, -1.0, 1.0]).unwrap();
        ProblemSpec::new(Objective::linear(&l), ConstraintSet::correlation(2).unwrap(), 1)
            .unwrap()
            .with_nu(nu)
            .unwrap()
    }

    #[test]
    fn oracle_on_maxcut_two() {
        // f = 2 − 2c on [[1,c],[c,1]]; rank one at c = 1 gives f = 0.
        let o = rank_regularized_optimum(&maxcut2(0.1)).unwrap();
        assert_eq!(o.rank, 1);
        assert!((o.objective - 0.1).abs() < 1e-12);
        assert!((o.point.get(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_prefers_rank_two_for_large_nu() {
        // f = ½(c − ½)² through the off-diagonal entry.
        let e = Matrix::symmetric(2, &[0.0, 0.5, 0.5, 0.0]).unwrap();
        let obj = Objective::least_squares(&[e], &[0.5]).unwrap();
        let p = ProblemSpec::new(obj, ConstraintSet::correlation(2).unwrap(), 1)
            .unwrap()
            .with_nu(1.0)
            .unwrap();
        // Rank one: c = ±1, f = ½(1 − ½)² = 1/8, total 9/8. Rank two: c = ½, total 2.
        let o = rank_regularized_optimum(&p).unwrap();
        assert_eq!(o.rank, 1);
        assert!((o.objective - 1.125).abs() < 1e-12);
        let p = p.with_nu(0.01).unwrap();
        let o = rank_regularized_optimum(&p).unwrap();
        assert_eq!(o.rank, 2);
        assert!((o.objective - 0.02).abs() < 1e-10);
    }

    #[test]
    fn oracle_refuses_other_sets() {
        let l = Matrix::symmetric(2, &[1.0, -1.0, -1.0, 1.0]).unwrap();
        let p = ProblemSpec::new(Objective::linear(&l), ConstraintSet::psd_cone(2).unwrap(), 1).unwrap();
        assert!(matches!(rank_regularized_optimum(&p), Err(Error::Refused(_))));
    }

    #[test]
    fn both_families_match_on_maxcut_two() {
        let p = maxcut2(0.1);
        let schedule = [0.5, 1.0, 2.0, 4.0, 8.0];
        let budget = EquivalenceBudget {
            starts: 4,
            ..EquivalenceBudget::default()
        };
        for fam in [SurrogateFamily::linear(), SurrogateFamily::quad_shift()] {
            let rep = equivalence_report(&p, &fam, &schedule, budget, 7).unwrap();
            assert!(rep.matching_rho.is_some(), "{}: {:?}", fam.tag(), rep.entries);
            let x = rep.matching_point.unwrap();
            assert!((x.get(0, 1) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_nu_is_the_convex_problem() {
        let p = maxcut2(0.0);
        let rep = equivalence_report(&p, &SurrogateFamily::linear(), &[1.0], EquivalenceBudget::default(), 3)
            .unwrap();
        assert!(rep.oracle.objective.abs() < 1e-12);
        assert!(rep.entries[0].surrogate.abs() < 1e-6);
    }
}
