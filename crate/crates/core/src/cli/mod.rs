//! Command-line front end: figure-data grids, verification suite and
//! CSV/JSON export.
//!
//! Exit codes: 0 success, 1 verification failure or numerical error,
//! 2 usage or configuration error.

mod commands;
mod config;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use thiserror::Error;

pub use commands::{
    cmd_corr, cmd_moments, cmd_probs, cmd_sample, cmd_zeros, cmd_mandel, CorrRow, MandelRow, ProbRow,
    ZerosOutput,
};
pub use config::{seq_label, with_param, Command, Format, Grid, NRange, ParamGrid, RunConfig, Scale};
pub use verify::{cmd_verify, CheckRow, VerifyReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] crate::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Numeric(_) => 1,
            Self::Config(_) | Self::Output(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tgcs", version, about = "Truncated generalized coherent states")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Rendered command output and whether it counts as a pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub pass: bool,
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn json<T: Serialize + ?Sized>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_with<F>(f: F) -> Result<String, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> Result<(), csv::Error>,
{
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| CliError::Output(e.to_string()))
}

fn tabular<T: Serialize>(rows: &[T], format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => csv_rows(rows),
        Format::Json => json(rows),
    }
}

/// Runs `command` on a fully merged configuration.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    if let Some(c) = cfg.command {
        if c != command {
            return Err(CliError::Config(format!("config is for {c:?}, invoked as {command:?}")));
        }
    }
    let format = cfg.format.unwrap_or_default();
    let ok = |body| Ok(Outcome { body, pass: true });
    match command {
        Command::Probs => ok(tabular(&cmd_probs(cfg)?, format)?),
        Command::Mandel => ok(tabular(&cmd_mandel(cfg)?, format)?),
        Command::Corr => ok(tabular(&cmd_corr(cfg)?, format)?),
        Command::Zeros => {
            let z = cmd_zeros(cfg)?;
            ok(match format {
                Format::Csv => csv_with(|b| z.roots.write_csv(b))?,
                Format::Json => json(&z)?,
            })
        }
        Command::Moments => {
            let r = cmd_moments(cfg)?;
            let body = match format {
                Format::Csv => csv_with(|b| r.write_csv(b))?,
                Format::Json => json(&r)?,
            };
            Ok(Outcome { body, pass: r.pass || !r.asserted })
        }
        Command::Sample => {
            let r = cmd_sample(cfg)?;
            ok(match format {
                Format::Csv => csv_with(|b| r.write_histogram_csv(b))?,
                Format::Json => json(&r)?,
            })
        }
        Command::Verify => {
            let r = cmd_verify(cfg)?;
            let body = match format {
                Format::Csv => csv_rows(&r.checks)?,
                Format::Json => json(&r)?,
            };
            Ok(Outcome { body, pass: r.pass })
        }
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = load_config(cli)?;
    let outcome = execute(cli.command, &cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.body)
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(outcome.body.as_bytes())
            .map_err(|e| CliError::Output(e.to_string()))?,
    }
    Ok(outcome)
}

/// Entry point shared by the binary and tests.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(o) if o.pass => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
