//! Command-line front end: argument handling, exit codes and the JSON
//! result envelope. [`run`] does everything except touching the process
//! streams, so it can be driven from tests.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod polytext;

use std::collections::BTreeMap;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use ccf::numerics::MIN_BITS;
use serde::Serialize;
use serde_json::{json, Value};

use args::Cli;
use commands::{execute, Precision, Report};
use error::{CliError, Result};

/// Environment variable overriding the starting precision.
pub const BITS_ENV: &str = "CCF_DEFAULT_BITS";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Serialize)]
pub struct WallTime {
    pub total_us: u64,
    #[serde(flatten)]
    pub phases: BTreeMap<String, u64>,
}

/// Everything a run reports in JSON mode. Apart from `wall_time`, the
/// serialisation depends only on the inputs.
#[derive(Debug, Serialize)]
pub struct Envelope {
    pub command: Option<String>,
    pub version: &'static str,
    pub inputs: Value,
    pub outputs: Value,
    pub precision_bits: Option<u32>,
    pub wall_time: WallTime,
    pub error: Option<ErrorInfo>,
}

/// Exit code and the text destined for stdout and stderr.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn start_bits(flag: Option<u32>, env: Option<String>) -> Result<(Option<u32>, &'static str)> {
    let (bits, source) = match (flag, env) {
        (Some(b), _) => (Some(b), "flag"),
        (None, Some(s)) => {
            let b = s.trim().parse().map_err(|_| CliError::Usage(format!("{BITS_ENV}={s:?} is not a bit count")))?;
            (Some(b), "env")
        }
        (None, None) => (None, "default"),
    };
    if let Some(b) = bits.filter(|&b| b < MIN_BITS) {
        return Err(CliError::Usage(format!("precision {b} is below the minimum of {MIN_BITS} bits")));
    }
    Ok((bits, source))
}

fn run_parsed(cli: &Cli, bits: Option<u32>) -> Result<Report> {
    let prec = Precision { start: bits, max: cli.max_bits };
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(|| execute(&cli.command, prec)),
        None => execute(&cli.command, prec),
    }
}

fn render(env: &Envelope) -> String {
    let mut s = serde_json::to_string_pretty(env).expect("envelope serialises");
    s.push('\n');
    s
}

/// Runs one command line (including the program name) with the given
/// value of [`BITS_ENV`].
pub fn run_with_env<I, S>(argv: I, bits_env: Option<String>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let json_mode = argv.iter().any(|a| a == "--json");
    let started = Instant::now();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Outcome { code: 0, stdout: e.to_string(), stderr: String::new() };
        }
        Err(e) => {
            let stdout = if json_mode {
                render(&Envelope {
                    command: None,
                    version: VERSION,
                    inputs: json!({ "argv": argv[1..].to_vec() }),
                    outputs: Value::Null,
                    precision_bits: None,
                    wall_time: WallTime { total_us: started.elapsed().as_micros() as u64, phases: BTreeMap::new() },
                    error: Some(ErrorInfo { kind: "usage".into(), message: e.kind().to_string(), exit_code: 2 }),
                })
            } else {
                String::new()
            };
            return Outcome { code: 2, stdout, stderr: e.render().to_string() };
        }
    };

    let resolved = start_bits(cli.bits, bits_env);
    let bits = resolved.as_ref().ok().and_then(|r| r.0);
    let mut inputs = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    inputs["bits"] = json!(bits);
    inputs["bits_source"] = json!(resolved.as_ref().map(|r| r.1).unwrap_or("invalid"));
    inputs["max_bits"] = json!(cli.max_bits);
    inputs["threads"] = json!(cli.threads);

    let result = resolved.and_then(|(b, _)| run_parsed(&cli, b));
    let total_us = started.elapsed().as_micros() as u64;
    let command = Some(cli.command.name().to_string());
    match result {
        Ok(report) => {
            let stdout = if cli.json {
                render(&Envelope {
                    command,
                    version: VERSION,
                    inputs,
                    outputs: report.outputs,
                    precision_bits: report.bits,
                    wall_time: WallTime { total_us, phases: report.timings },
                    error: None,
                })
            } else {
                format!("{}time: {:.3} ms\n", report.text, total_us as f64 / 1000.0)
            };
            Outcome { code: 0, stdout, stderr: String::new() }
        }
        Err(e) => {
            let code = e.exit_code();
            let stdout = if cli.json {
                render(&Envelope {
                    command,
                    version: VERSION,
                    inputs,
                    outputs: Value::Null,
                    precision_bits: None,
                    wall_time: WallTime { total_us, phases: BTreeMap::new() },
                    error: Some(ErrorInfo { kind: e.kind().into(), message: e.to_string(), exit_code: code }),
                })
            } else {
                String::new()
            };
            Outcome { code, stdout, stderr: format!("error: {e}\n") }
        }
    }
}

/// [`run_with_env`] reading [`BITS_ENV`] from the process environment.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    run_with_env(argv, std::env::var(BITS_ENV).ok())
}
