use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ipl_cli::{run, RunOptions, Subcommand};

/// Reproducible verification pipelines for doubly-periodic instantons.
#[derive(Debug, Parser)]
#[command(name = "ipl", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and CSV tables.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = std::env::var("IPL_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let opts = RunOptions { subcommand: args.subcommand, config: args.config, out: args.out, seed: args.seed };
    match run(&opts) {
        Ok(outcome) => {
            if !args.quiet {
                for c in &outcome.report.checks {
                    println!("{} {} = {:e}{}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default());
                }
                println!(
                    "{}: {} in {:.2} s, report at {}",
                    opts.subcommand.name(),
                    if outcome.report.passed { "passed" } else { "FAILED" },
                    outcome.report.wall_time_s,
                    outcome.report_path.display()
                );
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("ipl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
