//! Config-driven experiment runner behind the `ipl` binary.
//!
//! Each invocation reads one JSON config, runs one pipeline and writes
//! `report.json` plus any CSV tables into the output directory. Schema
//! problems are detected before anything is written.

pub mod config;
pub mod oracle;
mod pipelines;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use serde::Serialize;

use config::ExperimentConfig;
use report::{Provenance, Report, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Schema(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Conventions,
    ModelCheck,
    Invariants,
    Spectral,
    Stability,
    Moduli,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Conventions => "conventions",
            Subcommand::ModelCheck => "model-check",
            Subcommand::Invariants => "invariants",
            Subcommand::Spectral => "spectral",
            Subcommand::Stability => "stability",
            Subcommand::Moduli => "moduli",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub subcommand: Subcommand,
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub report_path: PathBuf,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            1
        }
    }
}

pub const REPORT_FILE: &str = "report.json";

/// Loads and validates the config, runs the pipeline and writes its outputs.
pub fn run(opts: &RunOptions) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(&opts.config).map_err(|e| CliError::Schema(format!("cannot read {}: {e}", opts.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if opts.seed.is_some() {
        cfg.seed = opts.seed;
    }
    pipelines::preflight(opts.subcommand, &cfg)?;

    let start = Instant::now();
    let result = pipelines::run(opts.subcommand, &cfg);
    let wall_time_s = start.elapsed().as_secs_f64();

    let report = Report::new(
        opts.subcommand.name(),
        serde_json::to_value(&cfg).map_err(|e| CliError::Io(e.to_string()))?,
        result.checks,
        result.tables.iter().map(Table::header).collect(),
        Provenance::current(cfg.seed),
        wall_time_s,
    );
    let report_path = write_outputs(&opts.out, &report, &result.tables, &result.files)?;
    Ok(Outcome { report, report_path })
}

fn write_outputs(out: &Path, report: &Report, tables: &[Table], files: &[(String, String)]) -> Result<PathBuf, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    fs::create_dir_all(out).map_err(io)?;
    for t in tables {
        t.write_csv(&out.join(&t.file)).map_err(|e| CliError::Io(e.to_string()))?;
    }
    for (name, body) in files {
        fs::write(out.join(name), body).map_err(io)?;
    }
    let path = out.join(REPORT_FILE);
    fs::write(&path, report.to_json()).map_err(io)?;
    Ok(path)
}
