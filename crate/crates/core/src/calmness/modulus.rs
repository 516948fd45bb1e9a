//! Monte-Carlo estimates of global and local error-bound moduli.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{Mat, Matrix};
use crate::rng;
use crate::sets::{
    psd_rank_truncate, supports_enumeration, ConstraintSet, GammaMethod, GammaOptions,
    GammaOracle,
};
use crate::spectral;

/// Samples with θ_r(X) at or below this are treated as points of Γ_r.
pub const SKIP_RESIDUAL: f64 = 1e-10;
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

const DECILES: usize = 10;
const DEFAULT_REGION: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct SampleSpec {
    pub samples: usize,
    pub seed: u64,
    /// Standard deviation of the ambient Gaussian before projection.
    pub scale: f64,
    /// Bounded region Δ (Frobenius radius) for non-compact families.
    pub region_radius: Option<f64>,
    /// `None` picks enumeration when Γ_r is discrete.
    pub gamma_method: Option<GammaMethod>,
    pub restarts: usize,
    pub projection_tol: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            samples: 1000,
            seed: 0,
            scale: 1.0,
            region_radius: None,
            gamma_method: None,
            restarts: 8,
            projection_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRecord {
    pub index: usize,
    pub residual: f64,
    pub distance: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusReport {
    pub kind: &'static str,
    /// Recorded ratios (samples with a positive residual).
    pub samples: usize,
    pub drawn: usize,
    pub skipped: usize,
    pub outside_region: usize,
    pub failed: usize,
    pub kappa_hat: f64,
    /// Max ratio per residual decile, smallest residuals first.
    pub ratio_deciles: Vec<Option<f64>>,
    pub decile_counts: Vec<usize>,
    pub decile_residual_max: Vec<Option<f64>>,
    pub worst_sample: Option<Matrix>,
    pub worst_index: Option<usize>,
    pub seed: u64,
    pub gamma_method: &'static str,
    pub non_compact: bool,
    pub region_radius: Option<f64>,
    pub delta: Option<f64>,
    /// γ̂(2δ)/γ̂(δ) for local estimates.
    pub doubling_factor: Option<f64>,
    #[serde(skip)]
    pub records: Vec<RatioRecord>,
}

impl ModulusReport {
    /// Flat CSV table of the recorded ratios.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,residual,distance,ratio\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                r.index, r.residual, r.distance, r.ratio
            ));
        }
        out
    }
}

enum Sample {
    Recorded(RatioRecord, Mat),
    Skipped,
    Outside,
    Failed,
}

fn gamma_options(omega: &ConstraintSet, r: usize, spec: &SampleSpec) -> GammaOptions {
    let method = spec.gamma_method.unwrap_or(if supports_enumeration(omega, r) {
        GammaMethod::Enumerate
    } else {
        GammaMethod::Alternating
    });
    GammaOptions {
        method,
        restarts: spec.restarts,
        seed: spec.seed ^ 0x9e37_79b9_7f4a_7c15,
    }
}

fn method_name(m: GammaMethod) -> &'static str {
    match m {
        GammaMethod::Enumerate => "enumerate",
        GammaMethod::Alternating => "alternating",
    }
}

fn check_spec(spec: &SampleSpec) -> Result<()> {
    if spec.samples == 0 {
        return Err(Error::arg("samples must be positive"));
    }
    if !(spec.scale > 0.0 && spec.scale.is_finite()) {
        return Err(Error::arg(format!("scale must be positive, got {}", spec.scale)));
    }
    if !(spec.projection_tol > 0.0) {
        return Err(Error::arg("projection tolerance must be positive"));
    }
    Ok(())
}

/// Sup of dist(X, Γ_r)/θ_r(X) over projected Gaussian samples X ∈ Ω.
pub fn estimate_global_modulus(
    omega: &ConstraintSet,
    r: usize,
    spec: &SampleSpec,
) -> Result<ModulusReport> {
    check_spec(spec)?;
    let opts = gamma_options(omega, r, spec);
    let oracle = GammaOracle::new(omega, r, opts)?;
    let non_compact = !omega.is_compact();
    let region = if non_compact {
        Some(spec.region_radius.unwrap_or(DEFAULT_REGION))
    } else {
        None
    };
    let shape = omega.shape();
    let samples: Vec<Sample> = (0..spec.samples)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(spec.seed, i as u64);
            let z = rng::gaussian_like(shape, omega.is_symmetric(), &mut g) * spec.scale;
            let Ok(x) = omega.project_mat(&z, spec.projection_tol) else {
                return Sample::Failed;
            };
            if let Some(radius) = region {
                if x.norm() > radius {
                    return Sample::Outside;
                }
            }
            let Ok(sigma) = linalg::singular_values(&x) else {
                return Sample::Failed;
            };
            let theta = spectral::theta_of(&sigma, r);
            if theta <= SKIP_RESIDUAL {
                return Sample::Skipped;
            }
            match oracle.nearest(&x) {
                Ok((dist, _)) => Sample::Recorded(
                    RatioRecord {
                        index: i,
                        residual: theta,
                        distance: dist,
                        ratio: dist / theta,
                    },
                    x,
                ),
                Err(_) => Sample::Failed,
            }
        })
        .collect();
    let mut report = summarize("global", samples, spec, opts.method, omega);
    report.non_compact = non_compact;
    report.region_radius = region;
    Ok(report)
}

/// Sup of dist(X, Γ_r)/[dist(X, Ω) + dist(X, Λ_r)] over X uniform in the
/// Frobenius ball B(X̄, δ). PSD-intersected sets use Ξ and Λ_r^+ instead.
/// The report carries the factor γ̂(2δ)/γ̂(δ) from the same seeds.
pub fn estimate_local_ebound(
    omega: &ConstraintSet,
    r: usize,
    xbar: &Matrix,
    delta: f64,
    spec: &SampleSpec,
) -> Result<ModulusReport> {
    check_spec(spec)?;
    omega.check(xbar, "Xbar")?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::arg(format!("delta must be positive, got {delta}")));
    }
    let x = xbar.as_dmatrix();
    let res = omega.residual_mat(x)?;
    let theta = spectral::theta_of(&linalg::singular_values(x)?, r);
    if res > 1e-8 || theta > 1e-8 * (1.0 + x.norm()) {
        return Err(Error::Precondition(format!(
            "Xbar is not in Γ_r (set residual {res:.3e}, rank residual {theta:.3e})"
        )));
    }
    let opts = gamma_options(omega, r, spec);
    let oracle = GammaOracle::new(omega, r, opts)?;
    let mut report = local_run(omega, r, x, delta, spec, &oracle, opts.method)?;
    let doubled = local_run(omega, r, x, 2.0 * delta, spec, &oracle, opts.method)?;
    report.delta = Some(delta);
    if report.kappa_hat > 0.0 {
        report.doubling_factor = Some(doubled.kappa_hat / report.kappa_hat);
    }
    Ok(report)
}

fn local_run(
    omega: &ConstraintSet,
    r: usize,
    xbar: &Mat,
    delta: f64,
    spec: &SampleSpec,
    oracle: &GammaOracle<'_>,
    method: GammaMethod,
) -> Result<ModulusReport> {
    let shape = omega.shape();
    let samples: Vec<Sample> = (0..spec.samples)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(spec.seed, i as u64);
            let x = xbar + rng::uniform_ball(shape, omega.is_symmetric(), delta, &mut g);
            let Ok(den) = residual_sum(omega, r, &x, spec.projection_tol) else {
                return Sample::Failed;
            };
            let Ok((dist, _)) = oracle.nearest(&x) else {
                return Sample::Failed;
            };
            if dist <= DENOMINATOR_FLOOR && den <= DENOMINATOR_FLOOR {
                return Sample::Skipped;
            }
            Sample::Recorded(
                RatioRecord {
                    index: i,
                    residual: den,
                    distance: dist,
                    ratio: dist / den.max(DENOMINATOR_FLOOR),
                },
                x,
            )
        })
        .collect();
    Ok(summarize("local", samples, spec, method, omega))
}

fn residual_sum(omega: &ConstraintSet, r: usize, x: &Mat, tol: f64) -> Result<f64> {
    if omega.psd_intersected() {
        let to_xi = (omega.project_xi_mat(x, tol)? - x).norm();
        let sym = crate::matrix::symmetrize(x);
        let to_rank = (psd_rank_truncate(&sym, r)? - x).norm();
        Ok(to_xi + to_rank)
    } else {
        let to_omega = (omega.project_mat(x, tol)? - x).norm();
        let sigma = linalg::singular_values(x)?;
        let to_rank = sigma.iter().skip(r).map(|s| s * s).sum::<f64>().sqrt();
        Ok(to_omega + to_rank)
    }
}

fn summarize(
    kind: &'static str,
    samples: Vec<Sample>,
    spec: &SampleSpec,
    method: GammaMethod,
    omega: &ConstraintSet,
) -> ModulusReport {
    let drawn = samples.len();
    let (mut skipped, mut outside, mut failed) = (0, 0, 0);
    let mut records = Vec::new();
    let mut worst: Option<(f64, usize, Mat)> = None;
    for s in samples {
        match s {
            Sample::Recorded(rec, x) => {
                if worst.as_ref().is_none_or(|(w, _, _)| rec.ratio > *w) {
                    worst = Some((rec.ratio, rec.index, x));
                }
                records.push(rec);
            }
            Sample::Skipped => skipped += 1,
            Sample::Outside => outside += 1,
            Sample::Failed => failed += 1,
        }
    }
    let kappa_hat = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let (ratio_deciles, decile_counts, decile_residual_max) = deciles(&records);
    let (worst_index, worst_sample) = match worst {
        Some((_, i, x)) => (Some(i), Some(omega.wrap(x))),
        None => (None, None),
    };
    ModulusReport {
        kind,
        samples: records.len(),
        drawn,
        skipped,
        outside_region: outside,
        failed,
        kappa_hat,
        ratio_deciles,
        decile_counts,
        decile_residual_max,
        worst_sample,
        worst_index,
        seed: spec.seed,
        gamma_method: method_name(method),
        non_compact: false,
        region_radius: None,
        delta: None,
        doubling_factor: None,
        records,
    }
}

type DecileProfile = (Vec<Option<f64>>, Vec<usize>, Vec<Option<f64>>);

/// Sorts by residual and splits into ten buckets whose sizes differ by at
/// most one and never decrease.
fn deciles(records: &[RatioRecord]) -> DecileProfile {
    let mut order: Vec<&RatioRecord> = records.iter().collect();
    order.sort_by(|a, b| a.residual.total_cmp(&b.residual).then(a.index.cmp(&b.index)));
    let n = order.len();
    let (base, extra) = (n / DECILES, n % DECILES);
    let mut maxes = Vec::with_capacity(DECILES);
    let mut counts = Vec::with_capacity(DECILES);
    let mut tops = Vec::with_capacity(DECILES);
    let mut at = 0;
    for b in 0..DECILES {
        let size = base + usize::from(b >= DECILES - extra);
        let bucket = &order[at..at + size];
        at += size;
        counts.push(size);
        maxes.push(bucket.iter().map(|r| r.ratio).reduce(f64::max));
        tops.push(bucket.last().map(|r| r.residual));
    }
    (maxes, counts, tops)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(index: usize, residual: f64, ratio: f64) -> RatioRecord {
        RatioRecord {
            index,
            residual,
            distance: residual * ratio,
            ratio,
        }
    }

    #[test]
    fn decile_counts_are_nondecreasing() {
        let recs: Vec<RatioRecord> = (0..23).map(|i| rec(i, i as f64, 1.0)).collect();
        let (_, counts, _) = deciles(&recs);
        assert_eq!(counts.iter().sum::<usize>(), 23);
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        let (maxes, counts, _) = deciles(&[]);
        assert!(maxes.iter().all(Option::is_none) && counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn correlation_two_by_two_modulus() {
        let c = ConstraintSet::correlation(2).unwrap();
        let spec = SampleSpec {
            samples: 400,
            seed: 5,
            ..Default::default()
        };
        let rep = estimate_global_modulus(&c, 1, &spec).unwrap();
        assert!(rep.samples > 0);
        assert!((rep.kappa_hat - 2f64.sqrt()).abs() < 0.02 * 2f64.sqrt());
        assert_eq!(rep.samples + rep.skipped + rep.failed + rep.outside_region, 400);
    }

    #[test]
    fn local_member_samples() {
        let c = ConstraintSet::correlation(2).unwrap();
        let x = Matrix::symmetric(2, &[1.0; 4]).unwrap();
        let spec = SampleSpec {
            samples: 200,
            seed: 1,
            ..Default::default()
        };
        let rep = estimate_local_ebound(&c, 1, &x, 0.3, &spec).unwrap();
        assert!(rep.kappa_hat.is_finite() && rep.kappa_hat > 0.0);
        assert!(rep.doubling_factor.is_some());
    }

    #[test]
    fn sup_is_monotone_in_sample_count() {
        let c = ConstraintSet::correlation(3).unwrap();
        let small = SampleSpec {
            samples: 50,
            seed: 3,
            ..Default::default()
        };
        let big = SampleSpec {
            samples: 100,
            ..small.clone()
        };
        let a = estimate_global_modulus(&c, 1, &small).unwrap();
        let b = estimate_global_modulus(&c, 1, &big).unwrap();
        assert!(b.kappa_hat >= a.kappa_hat);
    }
}
