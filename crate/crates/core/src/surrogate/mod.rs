//! The φ-family of DC surrogates for f + ν·rank, their conjugates ψ*, and
//! the lifted MPEC form in (X, W).
//!
//! A family member φ is convex near [0,1] with min_{[0,1]} φ = φ(t*) = 0 and
//! φ(1) = 1. For s ≥ 0, ψ*(s) = max_{t∈[0,1]} {st − φ(t)}, and the
//! surrogate term is ν Σ_i [ρσ_i − ψ*(ρσ_i)].

mod equivalence;
mod mpec;

pub use equivalence::{
    equivalence_report, rank_regularized_optimum, EquivalenceBudget, EquivalenceEntry,
    EquivalenceReport, RegularizedOracle,
};
pub use mpec::{lift_to_mpec, mpec_evaluate, MpecPoint, MPEC_TOL};

use crate::config::Section;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::penalty::ProblemSpec;
use crate::spectral;

const GRID: usize = 1000;
const GOLDEN_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Phi {
    /// φ(t) = t
    Linear,
    /// φ(t) = (t² + t)/2
    QuadShift,
    /// Convex piecewise-linear interpolation of (t, φ(t)) knots covering [0,1].
    Piecewise { knots: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateFamily {
    phi: Phi,
    t_star: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjugateMode {
    Closed,
    Numeric,
}

impl ConjugateMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(ConjugateMode::Closed),
            "numeric" => Ok(ConjugateMode::Numeric),
            other => Err(Error::arg(format!("unknown conjugate mode `{other}`"))),
        }
    }
}

impl SurrogateFamily {
    /// φ(t) = t; the surrogate is the capped ℓ1 penalty ν Σ min(ρσ_i, 1).
    pub fn linear() -> Self {
        SurrogateFamily {
            phi: Phi::Linear,
            t_star: 0.0,
        }
    }

    pub fn quad_shift() -> Self {
        SurrogateFamily {
            phi: Phi::QuadShift,
            t_star: 0.0,
        }
    }

    /// Knots are sorted by t and must span [0,1]; t* is declared.
    pub fn piecewise(knots: &[(f64, f64)], t_star: f64) -> Result<Self> {
        let mut knots = knots.to_vec();
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.len() < 2 {
            return Err(Error::arg("piecewise family needs at least two knots"));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::arg("piecewise knots must be finite"));
        }
        if knots.windows(2).any(|w| w[1].0 - w[0].0 <= 0.0) {
            return Err(Error::arg("piecewise knots need distinct t values"));
        }
        if knots[0].0 > 0.0 || knots[knots.len() - 1].0 < 1.0 {
            return Err(Error::arg("piecewise knots must cover [0, 1]"));
        }
        let fam = SurrogateFamily {
            phi: Phi::Piecewise { knots },
            t_star,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn phi_kind(&self) -> &Phi {
        &self.phi
    }

    pub fn tag(&self) -> &'static str {
        match self.phi {
            Phi::Linear => "linear",
            Phi::QuadShift => "quad-shift",
            Phi::Piecewise { .. } => "piecewise",
        }
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn phi(&self, t: f64) -> f64 {
        match &self.phi {
            Phi::Linear => t,
            Phi::QuadShift => 0.5 * (t * t + t),
            Phi::Piecewise { knots } => {
                let k = knots
                    .windows(2)
                    .position(|w| t <= w[1].0)
                    .unwrap_or(knots.len() - 2);
                let (a, b) = (knots[k], knots[k + 1]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        }
    }

    /// Grid check of convexity, φ(t*) = 0 = min φ on [0,1], and φ(1) = 1.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.t_star) {
            return Err(Error::arg(format!("t* = {} outside [0, 1]", self.t_star)));
        }
        let h = 1.0 / GRID as f64;
        let vals: Vec<f64> = (0..=GRID).map(|i| self.phi(i as f64 * h)).collect();
        if self.phi(self.t_star).abs() > 1e-12 {
            return Err(Error::arg(format!(
                "φ(t*) = {} but must vanish",
                self.phi(self.t_star)
            )));
        }
        if (self.phi(1.0) - 1.0).abs() > 1e-12 {
            return Err(Error::arg(format!("φ(1) = {} but must equal 1", self.phi(1.0))));
        }
        if let Some(v) = vals.iter().find(|&&v| v < -1e-12) {
            return Err(Error::arg(format!("φ takes the value {v} below φ(t*) = 0")));
        }
        if vals.windows(3).any(|w| w[0] - 2.0 * w[1] + w[2] < -1e-9) {
            return Err(Error::arg("φ is not convex on [0, 1]"));
        }
        Ok(())
    }

    /// Reads `tag = linear | quad-shift | piecewise`, with `breakpoints =
    /// t:v, t:v, ...` and `t_star` for the piecewise family.
    pub fn from_section(sec: &Section<'_>) -> Result<Self> {
        let tag = sec.get("tag").unwrap_or("linear");
        match tag {
            "linear" => Ok(Self::linear()),
            "quad-shift" => Ok(Self::quad_shift()),
            "piecewise" => {
                let raw = sec.require_str("breakpoints")?;
                let mut knots = Vec::new();
                for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let parsed = item
                        .split_once(':')
                        .and_then(|(t, v)| Some((t.trim().parse().ok()?, v.trim().parse().ok()?)));
                    match parsed {
                        Some(k) => knots.push(k),
                        None => {
                            return Err(sec.bad_value(
                                "breakpoints",
                                format!("breakpoint `{item}` is not `t:value`"),
                            ))
                        }
                    }
                }
                let t_star: f64 = sec.require("t_star")?;
                Self::piecewise(&knots, t_star).map_err(|e| sec.bad_value("breakpoints", e.to_string()))
            }
            other => Err(sec.bad_value("tag", format!("unknown surrogate family `{other}`"))),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("tag = {}\nt_star = {}\n", self.tag(), self.t_star);
        if let Phi::Piecewise { knots } = &self.phi {
            let items: Vec<String> = knots.iter().map(|(t, v)| format!("{t}:{v}")).collect();
            out.push_str(&format!("breakpoints = {}\n", items.join(", ")));
        }
        out
    }

    fn psi_closed(&self, s: f64) -> f64 {
        match &self.phi {
            Phi::Linear => (s - 1.0).max(0.0),
            Phi::QuadShift => {
                if s <= 0.5 {
                    0.0
                } else if s < 1.5 {
                    0.5 * (s - 0.5).powi(2)
                } else {
                    s - 1.0
                }
            }
            Phi::Piecewise { knots } => knots
                .iter()
                .filter(|(t, _)| (0.0..=1.0).contains(t))
                .map(|(t, v)| s * t - v)
                .chain([s - self.phi(1.0), -self.phi(0.0)])
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn psi_numeric(&self, s: f64) -> (f64, f64) {
        let g = |t: f64| s * t - self.phi(t);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut gc, mut gd) = (g(c), g(d));
        while b - a > GOLDEN_TOL {
            if gc >= gd {
                b = d;
                d = c;
                gd = gc;
                c = b - ratio * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + ratio * (b - a);
                gd = g(d);
            }
        }
        let mid = 0.5 * (a + b);
        [(g(mid), mid), (g(0.0), 0.0), (g(1.0), 1.0)]
            .into_iter()
            .fold((f64::NEG_INFINITY, 0.0), |best, cand| if cand.0 > best.0 { cand } else { best })
    }

    /// Midpoint of ∂ψ*(s), i.e. of the maximizer set in t.
    pub(crate) fn psi_subgradient(&self, s: f64) -> f64 {
        match &self.phi {
            Phi::Linear => {
                if (s - 1.0).abs() <= TIE_TOL {
                    0.5
                } else if s > 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Phi::QuadShift => (s - 0.5).clamp(0.0, 1.0),
            Phi::Piecewise { knots } => {
                let best = self.psi_closed(s);
                let ts: Vec<f64> = knots
                    .iter()
                    .filter(|(t, v)| (0.0..=1.0).contains(t) && (s * t - v - best).abs() <= TIE_TOL)
                    .map(|(t, _)| *t)
                    .collect();
                match (ts.first(), ts.last()) {
                    (Some(lo), Some(hi)) => 0.5 * (lo + hi),
                    _ => self.psi_numeric(s).1,
                }
            }
        }
    }
}

/// ψ*(s) = max_{t∈[0,1]} {st − φ(t)} for s ≥ 0.
pub fn psi_star(family: &SurrogateFamily, s: f64, mode: ConjugateMode) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::arg(format!("ψ* is evaluated at s ≥ 0, got {s}")));
    }
    Ok(match mode {
        ConjugateMode::Closed => family.psi_closed(s),
        ConjugateMode::Numeric => family.psi_numeric(s).0,
    })
}

/// ρσ − ψ*(ρσ), which lies in [0, 1].
pub(crate) fn capped_term(family: &SurrogateFamily, rho: f64, sigma: f64) -> f64 {
    let s = rho * sigma;
    s - family.psi_closed(s)
}

/// f(X) + νρ[‖X‖_* − ρ⁻¹ Σ_i ψ*(ρσ_i(X))].
pub fn surrogate_objective(
    problem: &ProblemSpec,
    family: &SurrogateFamily,
    rho: f64,
    x: &Matrix,
) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::arg(format!("rho must be positive, got {rho}")));
    }
    problem.set.check(x, "X")?;
    let sigma = spectral::singular_values(x)?;
    let term: f64 = sigma.iter().map(|&s| capped_term(family, rho, s)).sum();
    Ok(problem.objective.value(x)? + problem.nu * term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::Objective;
    use crate::sets::ConstraintSet;

    #[test]
    fn linear_conjugate() {
        let f = SurrogateFamily::linear();
        assert_eq!(psi_star(&f, 0.5, ConjugateMode::Closed).unwrap(), 0.0);
        assert_eq!(psi_star(&f, 2.0, ConjugateMode::Closed).unwrap(), 1.0);
        assert!(psi_star(&f, 2.0, ConjugateMode::Numeric).unwrap() - 1.0 < 1e-12);
        assert!(psi_star(&f, -1.0, ConjugateMode::Closed).is_err());
    }

    #[test]
    fn quad_shift_interior_maximum() {
        let f = SurrogateFamily::quad_shift();
        let v = psi_star(&f, 1.0, ConjugateMode::Closed).unwrap();
        assert!((v - 0.125).abs() < 1e-15);
        // Independent grid search.
        let grid = (0..=100_000)
            .map(|i| {
                let t = i as f64 / 100_000.0;
                t - 0.5 * (t * t + t)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((grid - 0.125).abs() < 1e-9);
        assert_eq!(f.psi_subgradient(1.0), 0.5);
    }

    #[test]
    fn zero_argument_gives_zero() {
        for f in [SurrogateFamily::linear(), SurrogateFamily::quad_shift()] {
            for m in [ConjugateMode::Closed, ConjugateMode::Numeric] {
                assert!(psi_star(&f, 0.0, m).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn piecewise_family_and_validation() {
        let f = SurrogateFamily::piecewise(&[(0.0, 0.0), (0.5, 0.1), (1.0, 1.0)], 0.0).unwrap();
        for s in [0.0, 0.3, 1.0, 2.5, 7.0] {
            let closed = psi_star(&f, s, ConjugateMode::Closed).unwrap();
            let numeric = psi_star(&f, s, ConjugateMode::Numeric).unwrap();
            assert!((closed - numeric).abs() < 1e-9, "s={s}");
        }
        // Concave knot pattern.
        assert!(SurrogateFamily::piecewise(&[(0.0, 0.0), (0.5, 0.9), (1.0, 1.0)], 0.0).is_err());
        // φ(1) ≠ 1.
        assert!(SurrogateFamily::piecewise(&[(0.0, 0.0), (1.0, 2.0)], 0.0).is_err());
        // Declared t* where φ does not vanish.
        assert!(SurrogateFamily::piecewise(&[(0.0, 0.0), (1.0, 1.0)], 0.5).is_err());
    }

    #[test]
    fn capped_l1_surrogate() {
        let set = ConstraintSet::ambient_sym(2).unwrap();
        let p = ProblemSpec::new(Objective::zero(2, 2), set, 1)
            .unwrap()
            .with_nu(1.0)
            .unwrap();
        let x = Matrix::diag(&[3.0, 0.2]).unwrap();
        let v = surrogate_objective(&p, &SurrogateFamily::linear(), 2.0, &x).unwrap();
        assert!((v - 1.4).abs() < 1e-14);
        let z = surrogate_objective(&p, &SurrogateFamily::linear(), 2.0, &Matrix::zeros_sym(2)).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn large_rho_counts_rank() {
        let set = ConstraintSet::ambient(2, 3).unwrap();
        let p = ProblemSpec::new(Objective::zero(2, 3), set, 1)
            .unwrap()
            .with_nu(0.7)
            .unwrap();
        let x = Matrix::new(2, 3, &[1.0, 2.0, 0.0, 2.0, 4.0, 0.0]).unwrap();
        for fam in [SurrogateFamily::linear(), SurrogateFamily::quad_shift()] {
            for rho in [10.0, 100.0, 1000.0] {
                let v = surrogate_objective(&p, &fam, rho, &x).unwrap();
                assert!((v - 0.7).abs() < 1e-9, "{} rho={rho}: {v}", fam.tag());
            }
        }
    }

    #[test]
    fn section_round_trip() {
        let f = SurrogateFamily::piecewise(&[(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)], 0.0).unwrap();
        let kv = crate::config::KeyValues::parse(&f.to_text()).unwrap();
        let g = SurrogateFamily::from_section(&kv.section("")).unwrap();
        assert_eq!(f, g);
        let bad = crate::config::KeyValues::parse("tag = piecewise\nbreakpoints = 0:0, x\nt_star = 0\n").unwrap();
        match SurrogateFamily::from_section(&bad.section("")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
