use std::path::Path;

use serde::Serialize;

use crate::calmness::{
    check_criterion1_with, check_criterion2_with, estimate_global_modulus, estimate_local_ebound,
    pam_feasibility, MethodChoice, Outcome as CertOutcome, PamOptions, SampleSpec,
};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::penalty::io::read_problem_file;
use crate::penalty::{rho_continuation, solve, PenaltyConfig, PenaltyKind, ProblemSpec};
use crate::sets::io::{read_matrix_file, read_set_file, set_from_section};
use crate::sets::{ConstraintSet, GammaMethod};
use crate::suite::sandwich_suite;
use crate::surrogate::{equivalence_report, EquivalenceBudget, SurrogateFamily};

use super::args::*;
use super::Outcome;

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::arg(format!("report serialization failed: {e}")))
}

pub(super) fn output_args(cmd: &Command) -> &OutputArgs {
    match cmd {
        Command::Certify(a) => &a.output,
        Command::Ebound(a) => &a.output,
        Command::Modulus(a) => &a.output,
        Command::Solve(a) => &a.output,
        Command::Continuation(a) => &a.output,
        Command::Surrogate(a) => &a.output,
        Command::Pam(a) => &a.output,
        Command::SandwichSuite(a) => &a.output,
    }
}

pub(super) fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Certify(a) => certify(a),
        Command::Ebound(a) => ebound(a),
        Command::Modulus(a) => modulus(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Continuation(a) => continuation(a),
        Command::Surrogate(a) => surrogate(a),
        Command::Pam(a) => pam(a),
        Command::SandwichSuite(a) => sandwich(a),
    }
}

fn build_set(a: &SetArgs) -> Result<ConstraintSet> {
    let path = Path::new(&a.set);
    if path.is_file() {
        return read_set_file(path);
    }
    let mut kv = KeyValues::new();
    kv.set("", "family", a.set.as_str());
    let mut put = |key: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.set("", key, v);
        }
    };
    put("n", a.n.map(|v| v.to_string()));
    put("m", a.m.map(|v| v.to_string()));
    put("radius", a.radius.map(|v| v.to_string()));
    put("norm", a.norm.clone());
    put("r", a.set_rank.map(|v| v.to_string()));
    put("k", a.k.map(|v| v.to_string()));
    put("p", a.p.map(|v| v.to_string()));
    put("psd", a.psd.then(|| "true".to_string()));
    put("symmetric", a.symmetric.then(|| "true".to_string()));
    set_from_section(&kv.section(""), Path::new("."))
}

/// Reads a point and matches it to the set's storage.
fn read_point(path: &Path, set: &ConstraintSet) -> Result<Matrix> {
    let x = read_matrix_file(path)?;
    if set.is_symmetric() && !x.is_symmetric() {
        return Err(Error::arg(format!(
            "{}: {} needs a symmetric point",
            path.display(),
            set
        )));
    }
    if !set.is_symmetric() && x.is_symmetric() {
        return Matrix::from_dmatrix(x.into_dmatrix());
    }
    Ok(x)
}

fn certify(a: &CertifyArgs) -> Result<Outcome> {
    let set = build_set(&a.set)?;
    let x = read_point(&a.point, &set)?;
    let method = MethodChoice::parse(&a.method)?;
    let criterion = a
        .criterion
        .unwrap_or(if set.psd_intersected() { 2 } else { 1 });
    let cert = if criterion == 1 {
        check_criterion1_with(&set, a.r, &x, method)?
    } else {
        check_criterion2_with(&set, a.r, &x, method)?
    };
    let passed = match a.expect.as_deref() {
        None => true,
        Some("trivial") => cert.outcome == CertOutcome::TrivialIntersection,
        Some("witness") => cert.outcome == CertOutcome::WitnessFound,
        Some(other) => {
            return Err(Error::arg(format!(
                "--expect takes `trivial` or `witness`, got `{other}`"
            )))
        }
    };
    Ok(Outcome {
        result: to_value(&cert)?,
        csv: None,
        seed: None,
        passed,
    })
}

fn sample_spec(a: &SamplingArgs) -> Result<SampleSpec> {
    Ok(SampleSpec {
        samples: a.samples,
        seed: a.seed,
        scale: a.scale,
        region_radius: a.region,
        gamma_method: a.gamma_method.as_deref().map(GammaMethod::parse).transpose()?,
        restarts: a.restarts,
        ..SampleSpec::default()
    })
}

fn ebound(a: &EboundArgs) -> Result<Outcome> {
    let set = build_set(&a.set)?;
    let x = read_point(&a.point, &set)?;
    let spec = sample_spec(&a.sampling)?;
    let rep = estimate_local_ebound(&set, a.r, &x, a.delta, &spec)?;
    Ok(Outcome {
        result: to_value(&rep)?,
        csv: Some(rep.to_csv()),
        seed: Some(spec.seed),
        passed: rep.kappa_hat.is_finite(),
    })
}

fn modulus(a: &ModulusArgs) -> Result<Outcome> {
    let set = build_set(&a.set)?;
    let spec = sample_spec(&a.sampling)?;
    let rep = estimate_global_modulus(&set, a.r, &spec)?;
    Ok(Outcome {
        result: to_value(&rep)?,
        csv: Some(rep.to_csv()),
        seed: Some(spec.seed),
        passed: rep.kappa_hat.is_finite(),
    })
}

fn penalty_setup(a: &PenaltyArgs) -> Result<(ProblemSpec, PenaltyConfig, Option<Matrix>)> {
    let problem = read_problem_file(&a.problem)?;
    let config = PenaltyConfig {
        kind: PenaltyKind::parse(&a.penalty, a.schatten_p)?,
        step: a.step,
        inner_tol: a.inner_tol,
        outer_tol: a.outer_tol,
        max_iters: a.max_iters,
        eps_smooth: a.eps_smooth,
        ..PenaltyConfig::default()
    };
    let x0 = a
        .x0
        .as_deref()
        .map(|p| read_point(p, &problem.set))
        .transpose()?;
    Ok((problem, config, x0))
}

fn solve_cmd(a: &SolveArgs) -> Result<Outcome> {
    let (problem, mut config, x0) = penalty_setup(&a.penalty)?;
    config.rho = a.rho;
    let trace = solve(&problem, &config, x0.as_ref(), a.penalty.seed)?;
    Ok(Outcome {
        csv: Some(trace.to_csv()),
        passed: trace.feasible,
        result: to_value(&trace)?,
        seed: Some(a.penalty.seed),
    })
}

fn continuation(a: &ContinuationArgs) -> Result<Outcome> {
    let (problem, mut config, x0) = penalty_setup(&a.penalty)?;
    config.rho_schedule = a.schedule.clone();
    let rep = rho_continuation(&problem, &config, x0.as_ref(), a.penalty.seed)?;
    let mut csv = String::from("rho,f,objective,theta,rank,iterations,converged\n");
    for e in &rep.entries {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{},{}\n",
            e.rho, e.f, e.objective, e.theta, e.rank, e.iterations, e.converged
        ));
    }
    Ok(Outcome {
        csv: Some(csv),
        passed: !rep.failure && rep.matches_oracle != Some(false),
        result: to_value(&rep)?,
        seed: Some(a.penalty.seed),
    })
}

fn read_family(spec: &str) -> Result<SurrogateFamily> {
    match spec {
        "linear" => Ok(SurrogateFamily::linear()),
        "quad-shift" => Ok(SurrogateFamily::quad_shift()),
        path => {
            let kv = KeyValues::read_file(Path::new(path))?;
            let name = if kv.has_section("family") { "family" } else { "" };
            SurrogateFamily::from_section(&kv.section(name))
        }
    }
}

fn surrogate(a: &SurrogateArgs) -> Result<Outcome> {
    let mut problem = read_problem_file(&a.problem)?;
    if let Some(nu) = a.nu {
        problem = problem.with_nu(nu)?;
    }
    let family = read_family(&a.family)?;
    let budget = EquivalenceBudget {
        starts: a.starts,
        max_iters: a.max_iters,
        ..EquivalenceBudget::default()
    };
    let rep = equivalence_report(&problem, &family, &a.schedule, budget, a.seed)?;
    let mut csv = String::from("rho,surrogate,f,rank,regularized,converged_starts,matches\n");
    for e in &rep.entries {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{},{:.16e},{},{}\n",
            e.rho, e.surrogate, e.f, e.rank, e.regularized, e.converged_starts, e.matches
        ));
    }
    Ok(Outcome {
        csv: Some(csv),
        passed: rep.matching_rho.is_some(),
        result: to_value(&rep)?,
        seed: Some(a.seed),
    })
}

fn pam(a: &PamArgs) -> Result<Outcome> {
    let set = build_set(&a.set)?;
    let x0 = match &a.x0 {
        Some(p) => read_point(p, &set)?,
        None if set.rows() == set.cols() => {
            let i = Matrix::identity(set.rows());
            if set.is_symmetric() {
                i
            } else {
                Matrix::from_dmatrix(i.into_dmatrix())?
            }
        }
        None => return Err(Error::arg(format!("{set} is not square; pass --x0"))),
    };
    let opts = PamOptions {
        c: a.c,
        tol: a.tol,
        max_iters: a.max_iters,
        seed: a.seed,
        ..PamOptions::default()
    };
    let trace = pam_feasibility(&set, a.r, &x0, &opts)?;
    let mut csv = String::from("iter,dist\n");
    for s in &trace.steps {
        csv.push_str(&format!("{},{:.16e}\n", s.iter, s.dist));
    }
    Ok(Outcome {
        csv: Some(csv),
        passed: trace.converged,
        result: to_value(&trace)?,
        seed: Some(a.seed),
    })
}

fn sandwich(a: &SandwichArgs) -> Result<Outcome> {
    let rep = sandwich_suite(a.samples, a.seed, a.max_dim)?;
    Ok(Outcome {
        csv: Some(rep.to_csv()),
        passed: rep.passed,
        result: to_value(&rep)?,
        seed: Some(a.seed),
    })
}
