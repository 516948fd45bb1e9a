//! Randomized check of ½θ_r ≤ η_r ≤ θ_r and of θ_r, η_r vanishing together.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;
use crate::spectral;

/// Slack on the two inequalities.
pub const SANDWICH_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteCheck {
    pub name: &'static str,
    pub evaluated: usize,
    pub violations: usize,
    /// Largest value of the violation measure; ≤ 0 means slack to spare.
    pub worst_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub samples: usize,
    pub seed: u64,
    pub max_dim: usize,
    pub checks: Vec<SuiteCheck>,
    pub passed: bool,
}

impl SandwichReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,evaluated,violations,worst_margin\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{:.6e}\n",
                c.name, c.evaluated, c.violations, c.worst_margin
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    evaluated: usize,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            worst: f64::NEG_INFINITY,
            ..Tally::default()
        }
    }

    fn add(&mut self, margin: f64, tol: f64) {
        self.evaluated += 1;
        if margin > tol {
            self.violations += 1;
        }
        self.worst = self.worst.max(margin);
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.evaluated += other.evaluated;
        self.violations += other.violations;
        self.worst = self.worst.max(other.worst);
        self
    }
}

/// Draws `samples` matrices with both sides in 1..=max_dim and checks every
/// r. Every fourth matrix is an exact low-rank product.
pub fn sandwich_suite(samples: usize, seed: u64, max_dim: usize) -> Result<SandwichReport> {
    if samples == 0 || max_dim == 0 {
        return Err(Error::arg("sandwich suite needs samples > 0 and max_dim > 0"));
    }
    let tallies = (0..samples)
        .into_par_iter()
        .map(|k| -> Result<[Tally; 3]> {
            let mut g = rng::stream(seed, k as u64);
            let rows = g.random_range(1..=max_dim);
            let cols = g.random_range(1..=max_dim);
            let x = if k % 4 == 3 {
                let rank = g.random_range(1..=rows.min(cols));
                rng::gaussian(rows, rank, &mut g) * rng::gaussian(rank, cols, &mut g)
            } else {
                rng::gaussian(rows, cols, &mut g)
            };
            let sigma = linalg::singular_values(&x)?;
            let zero_tol = SANDWICH_SLACK * sigma.first().copied().unwrap_or(0.0).max(1.0);
            let mut t = [Tally::new(); 3];
            for r in 1..=sigma.len() {
                let theta = spectral::theta_of(&sigma, r);
                let (_, eta) = spectral::truncated_of(&sigma, r);
                t[0].add(0.5 * theta - eta, SANDWICH_SLACK);
                t[1].add(eta - theta, SANDWICH_SLACK);
                let together = (theta <= zero_tol) == (eta <= zero_tol);
                t[2].add(if together { 0.0 } else { (theta - eta).abs() }, 0.0);
            }
            Ok(t)
        })
        .try_reduce(
            || [Tally::new(); 3],
            |a, b| Ok([a[0].merge(b[0]), a[1].merge(b[1]), a[2].merge(b[2])]),
        )?;
    let checks: Vec<SuiteCheck> = ["half-theta-le-eta", "eta-le-theta", "vanish-together"]
        .into_iter()
        .zip(tallies)
        .map(|(name, t)| SuiteCheck {
            name,
            evaluated: t.evaluated,
            violations: t.violations,
            worst_margin: t.worst,
        })
        .collect();
    let passed = checks.iter().all(|c| c.violations == 0);
    Ok(SandwichReport {
        samples,
        seed,
        max_dim,
        checks,
        passed,
    })
}
