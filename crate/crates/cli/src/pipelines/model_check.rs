use std::f64::consts::PI;

use ipl_core::asymptotics::{decay_exponent, poincare_constant, DecayOptions};
use ipl_core::gauge::{asd_residual, CurvaturePart, monodromy_drift_defect, weitzenbock_terms, CircleFamily, CircleKind, FourierField, FourierMode};
use ipl_core::hitchin::hitchin_residual;
use ipl_core::models::{hitchin_model, model_connection, ModelKind, ModelParams};
use ipl_core::spectral::{fourier_gap, GapRegion};
use ipl_core::{Mat2, Point, TorusSpec, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{domain, log_space, max, rng, PipelineResult};
use crate::config::{DecayConfig, ExperimentConfig, InequalitiesConfig, ResidualsConfig};
use crate::oracle::poincare_rayleigh;
use crate::report::{num, Check, Table};

/// Sections to run; with none given, residuals and decay use their defaults.
pub fn sections(cfg: &ExperimentConfig) -> (Option<ResidualsConfig>, Option<DecayConfig>, Option<InequalitiesConfig>) {
    if cfg.residuals.is_none() && cfg.decay.is_none() && cfg.inequalities.is_none() {
        return (Some(ResidualsConfig::default()), Some(DecayConfig::default()), None);
    }
    (cfg.residuals.clone(), cfg.decay.clone(), cfg.inequalities.clone())
}

pub fn run(cfg: &ExperimentConfig, out: &mut PipelineResult) {
    let (res, dec, ineq) = sections(cfg);
    if let Some(rc) = res {
        residuals(cfg, &rc, out);
    }
    if let Some(dc) = dec {
        decay(cfg, &dc, out);
    }
    if let Some(ic) = ineq {
        inequalities(cfg, &ic, out);
    }
}

fn model_row(p: &ModelParams) -> Vec<String> {
    let kind = match p.kind {
        ModelKind::Semisimple => "semisimple",
        ModelKind::Nilpotent => "nilpotent",
    };
    vec![kind.into(), num(p.lambda.re), num(p.lambda.im), num(p.mu.re), num(p.mu.im), num(p.alpha)]
}

const MODEL_COLUMNS: [&str; 6] = ["kind", "lambda_re", "lambda_im", "mu_re", "mu_im", "alpha"];

fn sample_points(rng: &mut ChaCha8Rng, n: usize, range: [f64; 2], torus: &TorusSpec) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let r = rng.gen_range(range[0].ln()..=range[1].ln()).exp();
            Point::new(r, rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..torus.period_x), rng.gen_range(0.0..torus.period_y))
        })
        .collect()
}

/// `(sup |F⁺|, sup Hitchin residual)` of a model over `points`.
fn model_residuals(cfg: &ExperimentConfig, p: &ModelParams, points: &[Point]) -> ipl_core::Result<(f64, f64)> {
    let conn = model_connection(p, &domain(cfg))?;
    let pair = hitchin_model(p, &domain(cfg))?;
    let mut asd: f64 = 0.0;
    let mut hit: f64 = 0.0;
    for q in points {
        asd = asd.max(asd_residual(conn.as_ref(), q)?);
        let (h1, h2) = hitchin_residual(&pair, q.r, q.theta)?;
        hit = hit.max(h1).max(h2);
    }
    Ok((asd, hit))
}

fn residuals(cfg: &ExperimentConfig, rc: &ResidualsConfig, out: &mut PipelineResult) {
    let models = cfg.model_set().unwrap_or_default();
    let mut r = rng(cfg, 1);
    let points = sample_points(&mut r, rc.samples, rc.r_range, &cfg.torus);
    let results: Vec<_> = models.par_iter().map(|p| model_residuals(cfg, p, &points)).collect();
    let mut cols = vec!["model"];
    cols.extend(MODEL_COLUMNS);
    cols.extend(["asd_sup", "hitchin_sup"]);
    let mut table = Table::new("residuals.csv", &cols);
    let (mut asd, mut hit) = (Vec::new(), Vec::new());
    for (i, (p, res)) in models.iter().zip(results).enumerate() {
        match res {
            Ok((a, h)) => {
                let mut row = vec![i.to_string()];
                row.extend(model_row(p));
                row.extend([num(a), num(h)]);
                table.push(row);
                asd.push(a);
                hit.push(h);
            }
            Err(e) => out.check(Check::errored(&format!("residuals_model_{i}"), e)),
        }
    }
    let detail = format!("{} models x {} points, r in [{}, {}]", models.len(), rc.samples, rc.r_range[0], rc.r_range[1]);
    out.check(Check::at_most("asd_residual_sup", max(asd), rc.tolerance).detail(detail.clone()));
    out.check(Check::at_most("hitchin_residual_sup", max(hit), rc.tolerance).detail(detail));

    if cfg.nilpotent_suite(rc.nilpotent) {
        let mut r = rng(cfg, 2);
        let points = sample_points(&mut r, rc.samples, rc.nilpotent_r_range, &cfg.torus);
        let detail = format!("{} points, r in [{}, {}]", rc.samples, rc.nilpotent_r_range[0], rc.nilpotent_r_range[1]);
        match model_residuals(cfg, &ModelParams::nilpotent(), &points) {
            Ok((a, h)) => {
                let mut row = vec!["nilpotent".to_string()];
                row.extend(model_row(&ModelParams::nilpotent()));
                row.extend([num(a), num(h)]);
                table.push(row);
                out.check(Check::at_most("nilpotent_asd_residual_sup", a, rc.nilpotent_tolerance).detail(detail.clone()));
                out.check(Check::at_most("nilpotent_hitchin_residual_sup", h, rc.nilpotent_tolerance).detail(detail));
            }
            Err(e) => out.check(Check::errored("nilpotent_residuals", e)),
        }
    }
    out.tables.push(table);
}

fn decay(cfg: &ExperimentConfig, dc: &DecayConfig, out: &mut PipelineResult) {
    let models: Vec<ModelParams> = cfg.model_set().unwrap_or_default().into_iter().filter(|p| p.mu.norm() > 0.0).collect();
    let rings = log_space(dc.r_range[0], dc.r_range[1], dc.rings);
    let fits: Vec<_> = models
        .par_iter()
        .map(|p| {
            let conn = model_connection(p, &domain(cfg))?;
            decay_exponent(conn.as_ref(), &rings, &DecayOptions::default())
        })
        .collect();
    let mut cols = vec!["model"];
    cols.extend(MODEL_COLUMNS);
    cols.extend(["gamma", "log_power", "rms", "monotone"]);
    let mut table = Table::new("decay.csv", &cols);
    let mut worst: Option<f64> = None;
    for (i, (p, fit)) in models.iter().zip(fits).enumerate() {
        match fit {
            Ok(f) => {
                let mut row = vec![i.to_string()];
                row.extend(model_row(p));
                row.extend([num(f.gamma), num(f.log_power), num(f.rms), f.monotone.to_string()]);
                table.push(row);
                if worst.map_or(true, |w| (f.gamma - dc.exponent).abs() > (w - dc.exponent).abs() || f.gamma.is_nan()) {
                    worst = Some(f.gamma);
                }
            }
            Err(e) => out.check(Check::errored(&format!("decay_model_{i}"), e)),
        }
    }
    match worst {
        Some(g) => out.check(
            Check::within("decay_exponent", g, dc.exponent, dc.tolerance)
                .detail(format!("worst fit over {} models with mu != 0, {} rings on [{}, {}]", models.len(), dc.rings, dc.r_range[0], dc.r_range[1])),
        ),
        None => out.check(Check::errored("decay_exponent", "no model with mu != 0 to fit")),
    }

    if cfg.nilpotent_suite(dc.nilpotent) {
        let rings = log_space(dc.nilpotent_r_range[0], dc.nilpotent_r_range[1], dc.rings);
        let fit = model_connection(&ModelParams::nilpotent(), &domain(cfg))
            .and_then(|conn| decay_exponent(conn.as_ref(), &rings, &DecayOptions { log_power: true, ..Default::default() }));
        match fit {
            Ok(f) => {
                let mut row = vec!["nilpotent".to_string()];
                row.extend(model_row(&ModelParams::nilpotent()));
                row.extend([num(f.gamma), num(f.log_power), num(f.rms), f.monotone.to_string()]);
                table.push(row);
                out.check(
                    Check::within("nilpotent_log_power", f.log_power, dc.log_power, dc.log_power_tolerance)
                        .detail(format!("fit ln|F| = c + gamma ln r + p ln ln r: gamma = {:.4}, rms = {:.2e}", f.gamma, f.rms)),
                );
            }
            Err(e) => out.check(Check::errored("nilpotent_log_power", e)),
        }
        // F_xy and F_ρφ alone carry the r⁻²(ln r²)⁻² rate; the mixed components decay like r⁻²(ln r)⁻¹
        let fit = model_connection(&ModelParams::nilpotent(), &domain(cfg)).and_then(|conn| {
            decay_exponent(conn.as_ref(), &rings, &DecayOptions { log_power: true, part: CurvaturePart::Contracted, ..Default::default() })
        });
        match fit {
            Ok(f) => out.check(
                Check::within("nilpotent_log_power_contracted", f.log_power, dc.log_power, dc.log_power_tolerance)
                    .detail(format!("contracted components only: gamma = {:.4}, rms = {:.2e}", f.gamma, f.rms)),
            ),
            Err(e) => out.check(Check::errored("nilpotent_log_power_contracted", e)),
        }
    }
    out.tables.push(table);
}

fn inequalities(cfg: &ExperimentConfig, ic: &InequalitiesConfig, out: &mut PipelineResult) {
    let mut table = Table::new("inequalities.csv", &["suite", "index", "value", "detail"]);
    gap_suite(cfg, ic, out, &mut table);
    drift_suite(cfg, ic, out, &mut table);
    weitzenbock_suite(cfg, ic, out, &mut table);
    poincare_suite(cfg, ic, out, &mut table);
    out.tables.push(table);
}

fn polar(r: f64, phi: f64) -> C64 {
    C64::from_polar(r, phi)
}

fn gap_suite(cfg: &ExperimentConfig, ic: &InequalitiesConfig, out: &mut PipelineResult, table: &mut Table) {
    let t = cfg.torus;
    let mut r = rng(cfg, 3);
    let mut worst = f64::INFINITY;
    let mut in_region = 0usize;
    for i in 0..ic.gap_samples {
        let mu = polar(r.gen_range(0.5..=2.0), r.gen_range(0.0..2.0 * PI));
        let region = GapRegion::for_mu(mu, &t);
        let lambda = polar(region.lambda_max * r.gen_range(0.0f64..=1.0).sqrt(), r.gen_range(0.0..2.0 * PI));
        let w = polar(region.w_min * r.gen_range(0.0..100f64.ln()).exp(), r.gen_range(0.0..2.0 * PI));
        let n_modes = r.gen_range(1..=6);
        let mut sigma: Vec<((i64, i64), C64)> =
            (0..n_modes).map(|_| ((r.gen_range(-3..=3), r.gen_range(-3..=3)), C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))).collect();
        let mass: f64 = sigma.iter().map(|s| s.1.norm_sqr()).sum::<f64>().sqrt();
        for s in &mut sigma {
            s.1 /= mass;
        }
        let g = fourier_gap(lambda, mu, w, &sigma, &t);
        in_region += g.in_region as usize;
        if g.gap < worst {
            worst = g.gap;
            table.push(vec!["fourier_gap_running_min".into(), i.to_string(), num(g.gap), String::new()]);
        }
    }
    out.check(Check::at_least("fourier_gap_min", worst, -1e-12).detail(format!("{} unit-mass samples; the floor absorbs rounding", ic.gap_samples)));
    out.check(Check::equal("fourier_gap_samples_in_region", in_region as f64, ic.gap_samples as f64));
}

fn drift_suite(cfg: &ExperimentConfig, ic: &InequalitiesConfig, out: &mut PipelineResult, table: &mut Table) {
    out.guard("monodromy_drift_defect", |out| {
        let d = domain(cfg);
        let semi = model_connection(&ModelParams::semisimple(C64::new(0.1, 0.2), C64::new(1.0, -0.5), 0.25)?, &d)?;
        let nil = model_connection(&ModelParams::nilpotent(), &d)?;
        let families = [
            ("semisimple_x_radial", &semi, CircleFamily { kind: CircleKind::X, start: Point::new(10.0, 0.3, 0.0, 0.0), end: Point::new(20.0, 0.3, 0.0, 0.0) }),
            ("semisimple_theta", &semi, CircleFamily { kind: CircleKind::Theta, start: Point::new(10.0, 0.0, 0.5, 0.2), end: Point::new(14.0, 0.0, 2.0, 1.0) }),
            ("nilpotent_x_radial", &nil, CircleFamily { kind: CircleKind::X, start: Point::new(5.0, 0.7, 0.0, 0.0), end: Point::new(10.0, 0.7, 0.0, 0.0) }),
        ];
        let mut worst = f64::NEG_INFINITY;
        for (i, (name, conn, fam)) in families.iter().enumerate() {
            let rep = monodromy_drift_defect(conn.as_ref(), fam, ic.drift_samples, ic.drift_steps)?;
            worst = worst.max(rep.defect);
            table.push(vec!["monodromy_drift".into(), i.to_string(), num(rep.defect), format!("{name}: max lhs {:.3e}, max rhs {:.3e}", rep.max_lhs, rep.max_rhs)]);
        }
        out.check(Check::at_most("monodromy_drift_defect", worst, ic.drift_tolerance).detail("max over 3 circle families of (lhs - rhs)"));
        Ok(())
    });
}

fn weitzenbock_suite(cfg: &ExperimentConfig, ic: &InequalitiesConfig, out: &mut PipelineResult, table: &mut Table) {
    let mut r = rng(cfg, 4);
    let mut fixtures = Vec::with_capacity(ic.weitzenbock_fixtures);
    for _ in 0..ic.weitzenbock_fixtures {
        let r_in = r.gen_range(1.0..2.0);
        let r_out = r_in + r.gen_range(1.0..2.0);
        let n_modes = r.gen_range(1..=3);
        let mut u = || r.gen_range(-1.0..1.0);
        let modes: Vec<FourierMode> = (0..n_modes)
            .map(|_| {
                let a = C64::new(u(), u());
                let matrix = Mat2::new(a, C64::new(u(), u()), C64::new(u(), u()), -a);
                // a_r = (r − R)(c₀ + c₁r) vanishes on the inner boundary
                let (c0, c1) = (u(), u());
                let profiles = [vec![-r_in * c0, c0 - r_in * c1, c1], vec![u(), u(), u()], vec![u(), u(), u()], vec![u(), u(), u()]];
                let freq = |x: f64| (x * 2.5).floor() as i32;
                FourierMode { p: freq(u()), n: freq(u()), m: freq(u()), matrix, profiles }
            })
            .collect();
        let lambda = [0.5 * u(), 0.5 * u()];
        fixtures.push((FourierField { torus: cfg.torus, modes }, lambda, r_in, r_out));
    }
    // rescale each fixture to unit gradient norm; the identity is quadratic in a
    let defects: Vec<_> = fixtures
        .par_iter()
        .map(|(f, l, a, b)| {
            let s = 1.0 / weitzenbock_terms(f, *l, *a, *b)?.gradient.sqrt();
            let modes = f.modes.iter().map(|m| FourierMode { matrix: m.matrix * C64::new(s, 0.0), ..m.clone() }).collect();
            weitzenbock_terms(&FourierField { torus: f.torus, modes }, *l, *a, *b)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (i, d) in defects.into_iter().enumerate() {
        match d {
            Ok(w) => {
                worst = worst.max(w.defect.abs());
                table.push(vec![
                    "weitzenbock".into(),
                    i.to_string(),
                    num(w.defect),
                    format!("R = {:.4}, R' = {:.4}, unit gradient norm {:.6}", fixtures[i].2, fixtures[i].3, w.gradient),
                ]);
            }
            Err(e) => out.check(Check::errored(&format!("weitzenbock_fixture_{i}"), e)),
        }
    }
    out.check(Check::at_most("weitzenbock_defect", worst, ic.weitzenbock_tolerance).detail(format!("max |defect| over {} fixtures of unit gradient norm", fixtures.len())));
}

fn poincare_suite(cfg: &ExperimentConfig, ic: &InequalitiesConfig, out: &mut PipelineResult, table: &mut Table) {
    let t = cfg.torus;
    let mut r = rng(cfg, 5);
    let samples: Vec<([f64; 2], u64)> = (0..ic.poincare_samples)
        .map(|_| {
            let l = [r.gen_range(-PI / t.period_x..PI / t.period_x), r.gen_range(-PI / t.period_y..PI / t.period_y)];
            (l, r.gen())
        })
        .collect();
    let results: Vec<_> = samples
        .par_iter()
        .map(|(l, seed)| poincare_constant(*l, &t, 8).map(|c| (c, poincare_rayleigh(*l, &t, ic.oracle_grid, ic.oracle_polynomials, *seed))))
        .collect();
    let mut rel = Vec::new();
    for (i, (res, (l, _))) in results.into_iter().zip(&samples).enumerate() {
        match res {
            Ok((c, o)) => {
                let e = (c - o).abs() / c;
                rel.push(e);
                table.push(vec!["poincare".into(), i.to_string(), num(e), format!("lambda = ({:.6}, {:.6}), constant {c:.8}, oracle {o:.8}", l[0], l[1])]);
            }
            Err(e) => out.check(Check::errored(&format!("poincare_sample_{i}"), e)),
        }
    }
    out.check(
        Check::at_most("poincare_constant_relative_error", max(rel), ic.poincare_relative_tolerance)
            .detail(format!("{} samples against a Rayleigh-Ritz oracle on a {}^2 grid", ic.poincare_samples, ic.oracle_grid)),
    );
}
