//! Batch front end: `nclp <command> <spec.json> [flags]`.
//!
//! Exit codes: 0 pass, 1 input error, 2 mathematical refusal (excluded
//! exponent regime or failed hypothesis).

mod commands;
pub mod report;
pub mod spec;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::exponent::Exponent;
pub use report::Report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_REFUSAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nclp", version, about = "Composition operators on finite-dimensional Haagerup L^p spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify the Jordan identities for the morphism section.
    CheckJordan(CommonArgs),
    /// Estimate ‖C_J‖ from L^p to L^q.
    Norm(CommonArgs),
    /// Decide whether a raw superoperator preserves characteristic functions.
    Classify(CommonArgs),
    /// Change of weights h → k (weight1 → weight2) and its bound.
    ChangeOfWeights(CommonArgs),
    /// Classical composition operator for the measure section.
    Classical(CommonArgs),
    /// Modular data of weight1 against weight2.
    Modular(CommonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Spec file (JSON).
    pub spec: PathBuf,
    #[arg(long)]
    pub p: Option<Exponent>,
    #[arg(long)]
    pub q: Option<Exponent>,
    /// Ratio p/q for a change-of-weights scale.
    #[arg(long)]
    pub r: Option<Exponent>,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Sample times for modular flows (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

/// Failure before a report could be produced.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Refusal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ExponentOrder { .. }
            | Error::NotFaithful { .. }
            | Error::NotModuleMap { .. }
            | Error::DominationFails(_)
            | Error::NotCommuting { .. }
            | Error::NotSummable { .. }
            | Error::NoConvergence { .. }
            | Error::SingularNegativePower
            | Error::Numerical(_) => Failure::Refusal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Input(s)
    }
}

impl From<&str> for Failure {
    fn from(s: &str) -> Self {
        Failure::Input(s.to_string())
    }
}

/// What a command hands back to the driver.
pub struct Outcome {
    pub verdict: &'static str,
    pub exit_code: i32,
    pub results: serde_json::Value,
    pub tolerances: Vec<(&'static str, f64)>,
    pub seed: Option<u64>,
}

fn arguments(name: &str, a: &CommonArgs) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("spec".into(), a.spec.display().to_string());
    if let Some(p) = a.p {
        m.insert("p".into(), p.to_string());
    }
    if let Some(q) = a.q {
        m.insert("q".into(), q.to_string());
    }
    if let Some(r) = a.r {
        m.insert("r".into(), r.to_string());
    }
    match name {
        "norm" | "change-of-weights" => {
            m.insert("restarts".into(), a.restarts.to_string());
            m.insert("max_iter".into(), crate::compop::NormOptions::default().max_iter.to_string());
        }
        "check-jordan" => {
            m.insert("samples".into(), a.samples.to_string());
        }
        _ => {}
    }
    if let Some(t) = &a.t {
        m.insert("t".into(), t.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    }
    m
}

/// Runs one invocation, writing the report to `stdout` (or `--out`) and
/// diagnostics to `stderr`; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
            } else {
                let _ = write!(stdout, "{e}");
            }
            return code;
        }
    };
    let (name, a) = match &cli.command {
        Command::CheckJordan(a) => ("check-jordan", a),
        Command::Norm(a) => ("norm", a),
        Command::Classify(a) => ("classify", a),
        Command::ChangeOfWeights(a) => ("change-of-weights", a),
        Command::Classical(a) => ("classical", a),
        Command::Modular(a) => ("modular", a),
    };
    let start = Instant::now();
    let bytes = match std::fs::read(&a.spec) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot read {}: {e}", a.spec.display());
            return EXIT_INPUT;
        }
    };
    let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    let text = match String::from_utf8(bytes) {
        Ok(t) => t,
        Err(_) => {
            let _ = writeln!(stderr, "error: {} is not valid UTF-8", a.spec.display());
            return EXIT_INPUT;
        }
    };
    let (spec, warnings) = match spec::parse(&text) {
        Ok(x) => x,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {}: {msg}", a.spec.display());
            return EXIT_INPUT;
        }
    };
    for w in &warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }

    let outcome = match &cli.command {
        Command::CheckJordan(a) => commands::check_jordan(&spec, a),
        Command::Norm(a) => commands::norm(&spec, a),
        Command::Classify(a) => commands::classify(&spec, a),
        Command::ChangeOfWeights(a) => commands::change_of_weights(&spec, a),
        Command::Classical(a) => commands::classical(&spec, a),
        Command::Modular(a) => commands::modular(&spec, a),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {}: {msg}", a.spec.display());
            return EXIT_INPUT;
        }
        Err(Failure::Refusal(msg)) => {
            let _ = writeln!(stderr, "refused: {msg}");
            Outcome {
                verdict: "REFUSED",
                exit_code: EXIT_REFUSAL,
                results: report::object(vec![("reason", serde_json::Value::String(msg))]),
                tolerances: vec![],
                seed: None,
            }
        }
    };

    let report = Report {
        command: name.to_string(),
        arguments: arguments(name, a),
        input_digest: digest,
        seed: outcome.seed,
        tolerances: outcome.tolerances.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        verdict: outcome.verdict.to_string(),
        exit_code: outcome.exit_code,
        results: outcome.results,
        warnings,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let rendered = match a.format {
        Format::Human => report.to_human(),
        Format::Machine => report.to_machine(),
    };
    match &a.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_INPUT;
            }
        }
        None => {
            let _ = stdout.write_all(rendered.as_bytes());
        }
    }
    outcome.exit_code
}
