//! Command-line runner. Every command writes one JSON report (schema 1)
//! and optionally a CSV table; exit status is 0 on success, 1 on a domain
//! failure and 2 on a usage error.

mod args;
mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use crate::config::KeyValues;
use crate::error::{Error, Result};

pub use args::*;

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "RANKCALM_THREADS";

/// Result of a command before it is wrapped in the report envelope.
pub(crate) struct Outcome {
    pub result: serde_json::Value,
    pub csv: Option<String>,
    pub seed: Option<u64>,
    pub passed: bool,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize> {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_file: Option<&'a Path>,
    config: &'a C,
    seed: Option<u64>,
    status: &'static str,
    result: &'a serde_json::Value,
}

#[derive(Serialize)]
struct Timing<'a> {
    command: &'a str,
    wall_seconds: f64,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. }
        | Error::Refused(_)
        | Error::Stall(_)
        | Error::Divergence(_) => 1,
        _ => 2,
    }
}

fn set_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::arg(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    // A second build in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Turns the entries of a config file into flags inserted right after the
/// subcommand, so explicit flags still win.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut config = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            match it.next() {
                Some(p) => config = Some(PathBuf::from(p)),
                None => return Err(Error::arg("--config needs a file")),
            }
            continue;
        }
        if let Some(p) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
            continue;
        }
        rest.push(a);
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let kv = KeyValues::read_file(&path)?;
    let pos = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 1);
    let Some(pos) = pos else {
        return Ok(rest);
    };
    let command = rest[pos].to_string_lossy().into_owned();
    let mut extra: Vec<OsString> = Vec::new();
    for section in ["", command.as_str()] {
        let sec = kv.section(section);
        for key in sec.keys() {
            let value = sec.get(key).unwrap_or_default();
            let flag = format!("--{}", key.replace('_', "-"));
            match value {
                "true" => extra.push(flag.into()),
                "false" => {}
                v => {
                    extra.push(flag.into());
                    extra.push(v.into());
                }
            }
        }
    }
    let mut out = rest[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[pos + 1..]);
    // Keep the file in the echo.
    out.push("--config".into());
    out.push(path.into_os_string());
    Ok(out)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(cli: &Cli, outcome: &Outcome, wall: f64) -> Result<()> {
    let output = commands::output_args(&cli.command);
    let envelope = Envelope {
        schema: SCHEMA,
        tool: "rankcalm",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        config_file: cli.config.as_deref(),
        config: &cli.command,
        seed: outcome.seed,
        status: if outcome.passed { "pass" } else { "fail" },
        result: &outcome.result,
    };
    let json = serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::arg(format!("report serialization failed: {e}")))?
        + "\n";
    match &output.out {
        Some(path) => {
            write_file(path, &json)?;
            let timing = serde_json::to_string_pretty(&Timing {
                command: cli.command.name(),
                wall_seconds: wall,
            })
            .map_err(|e| Error::arg(e.to_string()))?;
            let mut side = path.clone().into_os_string();
            side.push(".timing.json");
            write_file(Path::new(&side), &(timing + "\n"))?;
        }
        None => print!("{json}"),
    }
    if let (Some(path), Some(csv)) = (&output.csv, &outcome.csv) {
        write_file(path, csv)?;
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(e) = set_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    let start = Instant::now();
    let outcome = match commands::dispatch(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let wall = start.elapsed().as_secs_f64();
    if let Err(e) = emit(&cli, &outcome, wall) {
        eprintln!("error: {e}");
        return 2;
    }
    if outcome.passed {
        0
    } else {
        1
    }
}
