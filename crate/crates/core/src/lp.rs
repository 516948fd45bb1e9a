//! Dense two-phase simplex with Bland's rule.
//!
//! Solves `max c^T x` subject to equality rows, `<=` rows and `x >= 0`.
//! Sizes here are a few hundred columns at most, so a full tableau is fine.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-8;
/// Entries below this after a pivot are roundoff from degenerate pivots.
const DROP_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub eq_rows: Vec<(Vec<f64>, f64)>,
    pub le_rows: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            ..Default::default()
        }
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_rows.push((row, rhs));
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.le_rows.push((row, rhs));
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        solve(self)
    }
}

struct Tableau {
    /// rows x (cols + 1); the last column holds the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.cols + 1;
        let p = self.t[row][col];
        for k in 0..width {
            self.t[row][k] /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for k in 0..width {
                    r[k] -= f * pivot_row[k];
                    if r[k].abs() < DROP_TOL {
                        r[k] = 0.0;
                    }
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost` over columns with `allowed[j]`. Returns false if unbounded.
    fn run(&mut self, cost: &[f64], allowed: &[bool], pivots: &mut usize) -> Result<bool> {
        loop {
            let entering = (0..self.cols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = self
                    .t
                    .iter()
                    .zip(&self.basis)
                    .map(|(r, &b)| cost[b] * r[j])
                    .sum();
                z - cost[j] < -1e-10
            });
            let Some(j) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, r) in self.t.iter().enumerate() {
                let a = r[j];
                if a > PIVOT_TOL {
                    let ratio = r[self.cols] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12
                                || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else {
                return Ok(false);
            };
            self.pivot(row, j);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::NonConvergence {
                    what: "simplex".into(),
                    iterations: *pivots,
                    residual: f64::NAN,
                });
            }
        }
    }

    fn value(&self, cost: &[f64]) -> f64 {
        self.t
            .iter()
            .zip(&self.basis)
            .map(|(r, &b)| cost[b] * r[self.cols])
            .sum()
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.num_vars;
    if lp.objective.len() != n {
        return Err(Error::dim("objective", n, lp.objective.len()));
    }
    for (row, _) in lp.eq_rows.iter().chain(&lp.le_rows) {
        if row.len() != n {
            return Err(Error::dim("constraint row", n, row.len()));
        }
    }
    let n_le = lp.le_rows.len();
    let m = lp.eq_rows.len() + n_le;
    let art0 = n + n_le;
    let cols = art0 + m;

    let mut t = Vec::with_capacity(m);
    let mut slack = 0;
    for (k, (row, rhs)) in lp.eq_rows.iter().chain(&lp.le_rows).enumerate() {
        let mut r = vec![0.0; cols + 1];
        r[..n].copy_from_slice(row);
        if k >= lp.eq_rows.len() {
            r[n + slack] = 1.0;
            slack += 1;
        }
        r[cols] = *rhs;
        if *rhs < 0.0 {
            for v in r.iter_mut() {
                *v = -*v;
            }
        }
        r[art0 + k] = 1.0;
        t.push(r);
    }
    let mut tab = Tableau {
        t,
        basis: (art0..cols).collect(),
        cols,
    };
    let mut pivots = 0;

    let mut phase1 = vec![0.0; cols];
    for c in phase1.iter_mut().skip(art0) {
        *c = -1.0;
    }
    let all = vec![true; cols];
    tab.run(&phase1, &all, &mut pivots)?;
    let scale = lp
        .eq_rows
        .iter()
        .chain(&lp.le_rows)
        .map(|(_, b)| b.abs())
        .fold(1.0, f64::max);
    if tab.value(&phase1) < -1e-9 * scale {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive artificial variables out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= art0 {
            match (0..art0).find(|&j| tab.t[i][j].abs() > 1e-9 && !tab.basis.contains(&j)) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.objective);
    let mut allowed = vec![true; cols];
    for a in allowed.iter_mut().skip(art0) {
        *a = false;
    }
    if !tab.run(&cost, &allowed, &mut pivots)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (r, &b) in tab.t.iter().zip(&tab.basis) {
        if b < n {
            x[b] = r[cols].max(0.0);
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { x, value })
}
