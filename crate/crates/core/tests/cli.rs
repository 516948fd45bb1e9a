use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .display()
        .to_string()
}

fn rankcalm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankcalm"))
        .args(args)
        .env_remove("RANKCALM_THREADS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn certify_rank_one_correlation_point() {
    let point = data("corr3_rank1.txt");
    let out = rankcalm(&["certify", "--set", "correlation", "--n", "3", "--r", "1", "--point", &point]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["tool"], "rankcalm");
    assert_eq!(v["command"], "certify");
    assert_eq!(v["status"], "pass");
    assert_eq!(v["result"]["outcome"], "trivial-intersection");
    assert_eq!(v["result"]["criterion"], 2);
}

#[test]
fn unmet_expectation_is_a_domain_failure() {
    let point = data("corr3_rank1.txt");
    let out = rankcalm(&[
        "certify", "--set", "correlation", "--n", "3", "--r", "1", "--point", &point, "--expect",
        "witness",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["status"], "fail");
}

#[test]
fn criterion_one_finds_the_psd_witness() {
    let point = data("corr3_rank1.txt");
    let out = rankcalm(&[
        "certify", "--set", "correlation", "--n", "3", "--r", "1", "--point", &point,
        "--criterion", "1", "--expect", "witness",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["outcome"], "witness-found");
    assert!(v["result"]["witness"].is_object());
}

#[test]
fn usage_errors_exit_with_two() {
    let point = data("corr3_rank1.txt");
    for args in [
        vec!["certify", "--set", "nope", "--n", "3", "--r", "1", "--point", point.as_str()],
        vec!["certify", "--set", "correlation", "--n", "3", "--r", "1", "--point", "/no/such.txt"],
        vec!["certify", "--set", "correlation", "--n", "3", "--r", "1"],
        vec!["modulus", "--set", "correlation", "--n", "3", "--r", "1", "--bogus"],
        vec!["frobnicate"],
    ] {
        let out = rankcalm(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = rankcalm(&["certify", "--set", "correlation", "--n", "3", "--r", "1", "--point", "/no/such.txt"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such.txt"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_rankcalm"))
        .args(["sandwich-suite", "--samples", "10"])
        .env("RANKCALM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("RANKCALM_THREADS"));
}

#[test]
fn pam_without_convergence_exits_with_one() {
    let out = rankcalm(&["pam", "--set", "correlation", "--n", "3", "--r", "1", "--max-iters", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["status"], "fail");
}

#[test]
fn reports_tables_and_timing_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cont.json");
    let csv_path = dir.path().join("cont.csv");
    let out = rankcalm(&[
        "continuation",
        "--problem",
        &data("maxcut3.cfg"),
        "--out",
        out_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v = read_json(&out_path);
    assert_eq!(v["result"]["oracle"]["objective"].as_f64().unwrap().round(), -8.0);
    assert!(v.to_string().find("wall").is_none());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("rho,f,objective,theta,rank,iterations,converged\n"));
    assert_eq!(csv.lines().count(), 7);
    let mut side = out_path.into_os_string();
    side.push(".timing.json");
    let timing = read_json(&PathBuf::from(side));
    assert!(timing["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# shared\nset = correlation\nn = 2\nr = 1\n\n[modulus]\nsamples = 40\nseed = 9\n",
    )
    .unwrap();
    let out = rankcalm(&["--config", cfg.to_str().unwrap(), "modulus"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["config"]["modulus"]["sampling"]["samples"], 40);
    assert!(v["config_file"].as_str().unwrap().ends_with("run.cfg"));
    // Flags on the command line win over the file.
    let out = rankcalm(&["--config", cfg.to_str().unwrap(), "modulus", "--samples", "30"]);
    assert_eq!(json(&out)["config"]["modulus"]["sampling"]["samples"], 30);
}

#[test]
fn surrogate_and_sandwich_commands() {
    let out = rankcalm(&["surrogate", "--problem", &data("maxcut2.cfg"), "--family", "quad-shift"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["result"]["matching_rho"].is_number());
    assert_eq!(v["result"]["oracle"]["rank"], 1);

    let out = rankcalm(&["sandwich-suite", "--samples", "500", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["passed"], true);
}

#[test]
fn identical_runs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("m.json");
    let args = [
        "modulus", "--set", "correlation", "--n", "3", "--r", "1", "--samples", "100", "--seed",
        "4", "--out", out_path.to_str().unwrap(),
    ];
    assert_eq!(rankcalm(&args).status.code(), Some(0));
    let first = std::fs::read(&out_path).unwrap();
    assert_eq!(rankcalm(&args).status.code(), Some(0));
    assert_eq!(first, std::fs::read(&out_path).unwrap());
}
