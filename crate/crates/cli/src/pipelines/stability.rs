use ipl_core::geometry::reduce_dual;
use ipl_core::spectral::BundleModel;
use ipl_core::stability::{alpha_stable_extension, existence_obstruction, h0_total, ExtensionBundleSpec, Obstruction};
use ipl_core::{DualTorusPoint, C64};

use super::PipelineResult;
use crate::config::ExperimentConfig;
use crate::report::{num, Check, Table};

const ORDER_TWO: [[f64; 2]; 4] = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]];
const GENERIC: [f64; 2] = [0.3, 0.1];

/// Expected verdicts: an order-two asymptotic
/// state admits no charge-one instanton, and a state that is not order two
/// needs a nonzero residue.
fn expected(k: u32, order_two: bool, mu_zero: bool) -> Obstruction {
    match (order_two, k, mu_zero) {
        (true, 1, _) => Obstruction::BlockedOrder2K1,
        (false, _, true) => Obstruction::BlockedMu0,
        _ => Obstruction::Ok,
    }
}

pub fn run(cfg: &ExperimentConfig, out: &mut PipelineResult) {
    let sc = cfg.stability.clone().unwrap_or_default();
    let t = cfg.torus;
    let generic = reduce_dual(GENERIC, &t);

    let mut ext = Table::new("extensions.csv", &["b", "alpha", "degree", "unstable"]);
    let mut stable_found = 0usize;
    for &b in &sc.b {
        for &alpha in &sc.alpha {
            let spec = ExtensionBundleSpec { xi0: generic, b, k: 1, points: vec![C64::new(0.0, 0.0)] };
            match alpha_stable_extension(&spec, alpha) {
                Ok(v) => {
                    stable_found += (!v.is_unstable()) as usize;
                    ext.push(vec![b.to_string(), num(alpha), num(v.degree()), v.is_unstable().to_string()]);
                }
                Err(e) => out.check(Check::errored("alpha_stable_extension", e)),
            }
        }
    }
    out.check(
        Check::equal("extension_family_not_flagged_unstable", stable_found as f64, 0.0)
            .detail(format!("{} x {} grid of (b, alpha)", sc.b.len(), sc.alpha.len())),
    );

    let mut obs = Table::new("obstructions.csv", &["k", "xi1", "xi2", "mu", "verdict", "expected"]);
    let mut mismatches = 0usize;
    let points: Vec<(DualTorusPoint, bool)> =
        ORDER_TWO.iter().map(|x| (reduce_dual(*x, &t), true)).chain(std::iter::once((generic, false))).collect();
    for k in 1..=sc.k_max {
        for (xi0, order_two) in &points {
            for mu in [0.0, 1.0] {
                let want = expected(k, *order_two, mu == 0.0);
                match existence_obstruction(k, xi0, C64::new(mu, 0.0)) {
                    Ok(got) => {
                        mismatches += (got != want) as usize;
                        obs.push(vec![k.to_string(), num(xi0.xi[0]), num(xi0.xi[1]), num(mu), format!("{got:?}"), format!("{want:?}")]);
                    }
                    Err(e) => out.check(Check::errored("existence_obstruction", e)),
                }
            }
        }
    }
    out.check(Check::equal("obstruction_table_mismatches", mismatches as f64, 0.0).detail(format!("{} cases", obs.rows.len())));

    // k = 1 with ξ₀ = −ξ₀: at ξ = ξ₀ both infinity summands carry sections, so
    // h⁰ counts 2 where the charge allows 1
    let mut h0 = Table::new("h0.csv", &["xi1", "xi2", "order_two", "finite", "infinity", "total", "consistent"]);
    let (mut contradictions, mut order_two_cases, mut generic_consistent) = (0usize, 0usize, None);
    for (xi0, order_two) in &points {
        let res = BundleModel::rational(t, xi0.zeta, C64::new(1.0, 0.0), 10.0).and_then(|b| {
            let probe = if *order_two { *xi0 } else { DualTorusPoint::from_zeta(xi0.zeta + C64::new(0.02, 0.0), &t) };
            h0_total(&b, 1, &probe)
        });
        match res {
            Ok(rep) => {
                if *order_two {
                    order_two_cases += 1;
                    contradictions += (!rep.consistent) as usize;
                } else {
                    generic_consistent = Some(rep.consistent);
                }
                h0.push(vec![
                    num(xi0.xi[0]),
                    num(xi0.xi[1]),
                    order_two.to_string(),
                    rep.finite.to_string(),
                    rep.infinity.to_string(),
                    rep.total.to_string(),
                    rep.consistent.to_string(),
                ]);
            }
            Err(e) => out.check(Check::errored("h0_total", e)),
        }
    }
    out.check(Check::equal("h0_order_two_contradictions", contradictions as f64, order_two_cases as f64).detail("declared k = 1"));
    out.check(Check::equal("h0_generic_consistent", generic_consistent.map_or(f64::NAN, |c| c as u8 as f64), 1.0));
    out.tables.extend([ext, obs, h0]);
}
