use ipl_core::asymptotics::{canonicalize, extract, AsymptoticInvariants, ExtractionOptions};
use ipl_core::geometry::lattice_distance;
use ipl_core::models::{model_connection, perturb, ModelParams};
use rayon::prelude::*;

use super::{domain, max, PipelineResult};
use crate::config::{ExperimentConfig, ExtractionConfig};
use crate::report::{num, Check, Table};

pub fn section(cfg: &ExperimentConfig) -> ExtractionConfig {
    cfg.extraction.clone().unwrap_or_default()
}

/// Extracted invariants and `(|Δλ| mod lattice, |Δα|, |Δμ|)` against the
/// canonicalized inputs.
fn round_trip(cfg: &ExperimentConfig, p: &ModelParams, rings: &[f64], perturbation: Option<(f64, f64, u64)>) -> ipl_core::Result<(AsymptoticInvariants, [f64; 3])> {
    let t = cfg.torus;
    let mut conn = model_connection(p, &domain(cfg))?;
    if let Some((delta, amp, seed)) = perturbation {
        conn = perturb(conn, delta, amp, seed)?;
    }
    let opts = ExtractionOptions { instanton: false, ..ExtractionOptions::with_rings(rings) };
    let got = extract(conn.as_ref(), &opts)?;
    let (xi, a, m) = canonicalize(&p.xi0(&t), p.alpha, p.mu, &t);
    // ζ = iλ, so the ζ lattice distance is the λ distance
    let err = [lattice_distance(got.xi0.zeta - xi.zeta, &t), (got.alpha - a).abs(), (got.mu - m).norm()];
    Ok((got, err))
}

const NAMES: [&str; 3] = ["lambda", "alpha", "mu"];

fn suite(cfg: &ExperimentConfig, label: &str, rings: &[f64], tol: [f64; 3], perturbation: Option<(f64, f64, u64)>, out: &mut PipelineResult, table: &mut Table) {
    let models = cfg.model_set().unwrap_or_default();
    let results: Vec<_> = models
        .par_iter()
        .enumerate()
        .map(|(i, p)| round_trip(cfg, p, rings, perturbation.map(|(d, a, s)| (d, a, s.wrapping_add(i as u64)))))
        .collect();
    let mut worst = [Vec::new(), Vec::new(), Vec::new()];
    for (i, (p, res)) in models.iter().zip(results).enumerate() {
        match res {
            Ok((got, err)) => {
                table.push(vec![
                    label.into(),
                    i.to_string(),
                    num(p.lambda.re),
                    num(p.lambda.im),
                    num(p.mu.re),
                    num(p.mu.im),
                    num(p.alpha),
                    num(got.xi0.xi[0]),
                    num(got.xi0.xi[1]),
                    num(got.alpha),
                    num(got.mu.re),
                    num(got.mu.im),
                    num(err[0]),
                    num(err[1]),
                    num(err[2]),
                ]);
                for k in 0..3 {
                    worst[k].push(err[k]);
                }
            }
            Err(e) => out.check(Check::errored(&format!("{label}_model_{i}"), e)),
        }
    }
    for k in 0..3 {
        let v = std::mem::take(&mut worst[k]);
        out.check(
            Check::at_most(&format!("{label}_{}_error_max", NAMES[k]), max(v), tol[k])
                .detail(format!("{} models, rings {:?}", models.len(), rings)),
        );
    }
}

pub fn run(cfg: &ExperimentConfig, out: &mut PipelineResult) {
    let x = section(cfg);
    let mut table = Table::new(
        "invariants.csv",
        &[
            "suite", "model", "lambda_re", "lambda_im", "mu_re", "mu_im", "alpha", "xi0_1", "xi0_2", "alpha_out", "mu_out_re", "mu_out_im",
            "lambda_error", "alpha_error", "mu_error",
        ],
    );
    suite(cfg, "exact", &x.rings, x.tolerances, None, out, &mut table);
    if let Some(p) = &x.perturbed {
        let seed = cfg.seed.unwrap_or(0);
        suite(cfg, "perturbed", &p.rings, p.tolerances, Some((p.delta, p.amplitude, seed)), out, &mut table);
    }
    out.tables.push(table);
}
