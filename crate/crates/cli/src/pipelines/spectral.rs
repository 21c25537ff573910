use std::f64::consts::PI;

use ipl_core::geometry::{covering_radius, dual_lattice, lattice_distance};
use ipl_core::spectral::{jumping_points, phi_residue, Branch, BundleModel};
use ipl_core::{DualTorusPoint, C64};
use rand::Rng;

use super::{max, min, rng, PipelineResult};
use crate::config::{c, CorrespondenceConfig, DichotomyConfig, ExperimentConfig};
use crate::oracle::jumping_scan;
use crate::report::{num, Check, Table};

pub fn run(cfg: &ExperimentConfig, out: &mut PipelineResult) {
    let s = cfg.spectral.clone().unwrap_or_default();
    if let Some(cc) = &s.correspondence {
        correspondence(cfg, cc, out);
    }
    if let Some(dc) = &s.dichotomy {
        dichotomy(cfg, dc, out);
    }
}

fn correspondence(cfg: &ExperimentConfig, cc: &CorrespondenceConfig, out: &mut PipelineResult) {
    let t = cfg.torus;
    let zeta0 = c(cc.zeta0);
    let mut r = rng(cfg, 11);
    let mut table = Table::new("spectral.csv", &["xi1", "xi2", "re_w", "im_w", "mult"]);
    let mut residues = Table::new("residues.csv", &["mu_re", "mu_im", "sign", "residue_re", "residue_im", "error"]);
    let (mut mult_bad, mut oracle_bad, mut samples) = (0usize, 0usize, 0usize);
    let mut residue_err = Vec::new();
    let [g1, g2] = dual_lattice(&t);
    for _ in 0..cc.mu_samples {
        let mu = C64::from_polar(r.gen_range(cc.mu_abs[0]..=cc.mu_abs[1]), r.gen_range(0.0..2.0 * PI));
        let bundle = match BundleModel::rational(t, zeta0, mu, cc.r_lo) {
            Ok(b) => b,
            Err(e) => {
                out.check(Check::errored("spectral_bundle", e));
                continue;
            }
        };
        // |ζ − ζ₀| strictly inside (|μ|/(0.9 r_hi), |μ|/(1.1 r_lo)) keeps the root inside the annulus
        let (d_lo, d_hi) = (mu.norm() / (0.9 * cc.r_hi), mu.norm() / (1.1 * cc.r_lo));
        for _ in 0..cc.xi_per_mu {
            let d = r.gen_range(d_lo.ln()..d_hi.ln()).exp();
            let xi = DualTorusPoint::from_zeta(zeta0 + C64::from_polar(d, r.gen_range(0.0..2.0 * PI)), &t);
            samples += 1;
            match jumping_points(&bundle, &xi, cc.r_lo, cc.r_hi, Branch::Both) {
                Ok(data) => {
                    if data.total_multiplicity() != 1 {
                        mult_bad += 1;
                    }
                    let reach = xi.zeta.norm() + zeta0.norm() + mu.norm() / cc.r_lo;
                    let half_width = (reach / g1.re.min(g2.im)).ceil() as i64 + 2;
                    let scan = jumping_scan(zeta0, mu, xi.zeta, &t, cc.r_lo, cc.r_hi, half_width);
                    let agree = scan.len() == data.points.len()
                        && data.points.iter().all(|p| scan.iter().any(|(w, s)| *s == p.sign && (w - p.w).norm() <= 1e-9 * w.norm()));
                    if !agree {
                        oracle_bad += 1;
                    }
                    for p in &data.points {
                        table.push(vec![num(xi.xi[0]), num(xi.xi[1]), num(p.w.re), num(p.w.im), p.multiplicity.to_string()]);
                    }
                }
                Err(e) => out.check(Check::errored("jumping_points", e)),
            }
        }
        for sign in [1.0, -1.0] {
            let z0 = zeta0 * sign;
            let xi0 = DualTorusPoint::from_zeta(z0, &t);
            let phase = r.gen_range(0.0..2.0 * PI);
            // offsets keep every jumping point on |w| ≥ r_lo
            let approach: Vec<DualTorusPoint> = (1..=cc.approach_steps)
                .map(|j| DualTorusPoint::from_zeta(z0 + C64::from_polar(0.5 * d_hi * 2f64.powi(-(j as i32)), phase), &t))
                .collect();
            match phi_residue(&bundle, &xi0, &approach) {
                Ok(res) => {
                    let err = (res - mu * sign).norm();
                    residue_err.push(err);
                    residues.push(vec![num(mu.re), num(mu.im), num(sign), num(res.re), num(res.im), num(err)]);
                }
                Err(e) => out.check(Check::errored("phi_residue", e)),
            }
        }
    }
    out.check(Check::equal("jumping_multiplicity_violations", mult_bad as f64, 0.0).detail(format!("{samples} regular samples, branch both")));
    out.check(Check::equal("jumping_oracle_disagreements", oracle_bad as f64, 0.0).detail("closed-form lattice-box scan"));
    out.check(
        Check::at_most("phi_residue_error_max", max(residue_err), cc.residue_tolerance)
            .detail(format!("{} residues, +mu at +xi0 and -mu at -xi0", 2 * cc.mu_samples)),
    );
    out.tables.push(table);
    out.tables.push(residues);
}

fn dichotomy(cfg: &ExperimentConfig, dc: &DichotomyConfig, out: &mut PipelineResult) {
    let t = cfg.torus;
    let zeta0 = c(dc.zeta0);
    let mut r = rng(cfg, 12);
    let mut table = Table::new("dichotomy.csv", &["mu_re", "mu_im", "j", "distance", "abs_w", "bound"]);
    let mut ratios = Vec::new();
    for m in &dc.mu {
        let mu = c(*m);
        let r_min = dc.r_min_factor * mu.norm();
        let bundle = match BundleModel::rational(t, zeta0, mu, r_min) {
            Ok(b) => b,
            Err(e) => {
                out.check(Check::errored("dichotomy_bundle", e));
                continue;
            }
        };
        let phase = r.gen_range(0.0..2.0 * PI);
        for j in 1..=dc.steps {
            let d = 0.1 * 2f64.powi(-(j as i32));
            let xi = DualTorusPoint::from_zeta(zeta0 + C64::from_polar(d, phase), &t);
            let dist = lattice_distance(xi.zeta - zeta0, &t);
            let bound = mu.norm() / (2.0 * dist);
            match jumping_points(&bundle, &xi, r_min, f64::INFINITY, Branch::Both) {
                Ok(data) => {
                    let w = data.points.iter().map(|p| p.w.norm()).fold(0.0, f64::max);
                    ratios.push(w / bound);
                    table.push(vec![num(mu.re), num(mu.im), j.to_string(), num(dist), num(w), num(bound)]);
                }
                Err(e) => out.check(Check::errored("dichotomy_jumping_points", e)),
            }
        }
    }
    out.check(Check::at_least("blowup_ratio_min", min(ratios), 1.0).detail("min over the approach of |w| / (|mu| / (2 |zeta_j - zeta0|))"));

    // μ = 0: ζ(w) = ζ₀ + c/w² never reaches a twist separated from ±ζ₀ on |w| ≥ annulus
    let rho = covering_radius(&t);
    let mut found = 0usize;
    let mut tested = 0usize;
    let mut attempts = 0usize;
    while tested < dc.zero_mu_samples && attempts < 1000 * dc.zero_mu_samples {
        attempts += 1;
        let tail = C64::from_polar(r.gen_range(0.0..=dc.zero_mu_tail_max), r.gen_range(0.0..2.0 * PI));
        let xi = ipl_core::geometry::reduce_dual([r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)], &t);
        if lattice_distance(xi.zeta - zeta0, &t) < dc.separation || lattice_distance(xi.zeta + zeta0, &t) < dc.separation {
            continue;
        }
        tested += 1;
        let bundle = BundleModel { torus: t, lambda: zeta0, tail: vec![C64::new(0.0, 0.0), tail], r_min: dc.zero_mu_annulus };
        match jumping_points(&bundle, &xi, dc.zero_mu_annulus, f64::INFINITY, Branch::Both) {
            Ok(data) => found += data.total_multiplicity(),
            Err(e) => {
                out.check(Check::errored("zero_mu_jumping_points", e));
                break;
            }
        }
    }
    out.check(
        Check::equal("zero_mu_jumping_points", found as f64, 0.0)
            .detail(format!("{tested} samples on |w| >= {}, separation {}, covering radius {rho:.4}", dc.zero_mu_annulus, dc.separation)),
    );
    out.tables.push(table);
}
