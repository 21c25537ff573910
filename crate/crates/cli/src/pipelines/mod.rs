mod conventions;
mod invariants;
mod model_check;
mod moduli;
mod spectral;
mod stability;

use ipl_core::models::ModelDomain;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::report::{Check, Table};
use crate::{CliError, Subcommand};

#[derive(Debug, Default)]
pub struct PipelineResult {
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Extra files `(name, contents)` for the output directory.
    pub files: Vec<(String, String)>,
}

impl PipelineResult {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Runs `f`; an error becomes a failed check named `name`.
    fn guard(&mut self, name: &str, f: impl FnOnce(&mut Self) -> ipl_core::Result<()>) {
        if let Err(e) = f(self) {
            self.checks.push(Check::errored(name, e));
        }
    }
}

/// Config checks that depend on the subcommand; nothing is written on failure.
pub fn preflight(sub: Subcommand, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let randomized = match sub {
        Subcommand::Conventions | Subcommand::Stability => None,
        Subcommand::ModelCheck => {
            let (res, _, ineq) = model_check::sections(cfg);
            (res.is_some() || ineq.is_some()).then_some("model-check")
        }
        Subcommand::Invariants => invariants::section(cfg).perturbed.is_some().then_some("invariants (perturbed)"),
        Subcommand::Spectral => Some("spectral"),
        Subcommand::Moduli => Some("moduli"),
    };
    if let Some(what) = randomized {
        cfg.require_seed(what)?;
    }
    if matches!(sub, Subcommand::ModelCheck | Subcommand::Invariants) {
        cfg.model_set()?;
    }
    Ok(())
}

pub fn run(sub: Subcommand, cfg: &ExperimentConfig) -> PipelineResult {
    let mut out = PipelineResult::default();
    match sub {
        Subcommand::Conventions => conventions::run(cfg, &mut out),
        Subcommand::ModelCheck => model_check::run(cfg, &mut out),
        Subcommand::Invariants => invariants::run(cfg, &mut out),
        Subcommand::Spectral => spectral::run(cfg, &mut out),
        Subcommand::Stability => stability::run(cfg, &mut out),
        Subcommand::Moduli => moduli::run(cfg, &mut out),
    }
    out
}

fn domain(cfg: &ExperimentConfig) -> ModelDomain {
    ModelDomain { torus: cfg.torus, r_min: cfg.r_min }
}

/// Independent stream `stream` of the run seed.
fn rng(cfg: &ExperimentConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    r.set_stream(stream);
    r
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

fn min(v: impl IntoIterator<Item = f64>) -> f64 {
    -max(v.into_iter().map(|x| -x))
}
