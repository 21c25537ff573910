//! Curvature decay fits and the instanton number.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{curvature, ConnectionSource, CurvaturePart, Point};
use crate::numerics::{composite_gauss, linear_fit, lstsq};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayOptions {
    pub n_theta: usize,
    /// Torus samples per direction.
    pub n_torus: usize,
    /// Fit `ln|F| = c + γ ln r + p ln ln r` instead of `c + γ ln r`.
    pub log_power: bool,
    pub part: CurvaturePart,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions { n_theta: 16, n_torus: 2, log_power: false, part: CurvaturePart::Full }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `−∞` when the curvature vanishes on every ring.
    pub gamma: f64,
    pub log_power: f64,
    pub rms: f64,
    /// `sup |F|` per ring.
    pub sup: Vec<f64>,
    pub monotone: bool,
}

fn ring_sup(conn: &dyn ConnectionSource, r: f64, n_theta: usize, n_torus: usize, part: CurvaturePart) -> Result<f64> {
    let t = conn.torus();
    let mut sup: f64 = 0.0;
    for i in 0..n_theta {
        for j in 0..n_torus {
            for k in 0..n_torus {
                let p = Point::new(
                    r,
                    2.0 * PI * i as f64 / n_theta as f64,
                    t.period_x * j as f64 / n_torus as f64,
                    t.period_y * k as f64 / n_torus as f64,
                );
                sup = sup.max(curvature(conn, &p)?.norm_sqr_part(part).sqrt());
            }
        }
    }
    Ok(sup)
}

/// Fits the decay of `sup_ring |F|` over `rings` (at least six, spanning a decade).
/// Non-monotone data is fitted anyway and flagged in the result.
pub fn decay_exponent(conn: &dyn ConnectionSource, rings: &[f64], opts: &DecayOptions) -> Result<DecayFit> {
    if rings.len() < 6 {
        return Err(Error::InvalidParameter(format!("need at least 6 rings, got {}", rings.len())));
    }
    let (lo, hi) = (rings.iter().cloned().fold(f64::INFINITY, f64::min), rings.iter().cloned().fold(0.0, f64::max));
    if !(hi >= 10.0 * lo) {
        return Err(Error::InvalidParameter("rings must span at least a decade".into()));
    }
    if opts.log_power && lo <= 1.0 {
        return Err(Error::InvalidParameter("a log-power fit needs r > 1".into()));
    }
    for &r in rings {
        conn.domain().check(r)?;
    }
    let sup: Result<Vec<f64>> = rings.par_iter().map(|&r| ring_sup(conn, r, opts.n_theta, opts.n_torus, opts.part)).collect();
    let sup = sup?;
    let mut order: Vec<usize> = (0..rings.len()).collect();
    order.sort_by(|&a, &b| rings[a].total_cmp(&rings[b]));
    let monotone = order.windows(2).all(|w| sup[w[1]] <= sup[w[0]]);
    if sup.iter().all(|&s| s == 0.0) {
        return Ok(DecayFit { gamma: f64::NEG_INFINITY, log_power: 0.0, rms: 0.0, sup, monotone });
    }
    if sup.iter().any(|&s| s <= 0.0) {
        return Err(Error::FitResidual { residual: f64::INFINITY, threshold: 0.0 });
    }
    let ys: Vec<f64> = sup.iter().map(|s| s.ln()).collect();
    let (gamma, log_power, rms) = if opts.log_power {
        let a = DMatrix::from_fn(rings.len(), 3, |i, j| match j {
            0 => 1.0,
            1 => rings[i].ln(),
            _ => rings[i].ln().ln(),
        });
        let (c, rms) = lstsq(&a, &DVector::from_vec(ys));
        (c[1], c[2], rms)
    } else {
        let xs: Vec<f64> = rings.iter().map(|r| r.ln()).collect();
        let (_, g, rms) = linear_fit(&xs, &ys);
        (g, 0.0, rms)
    };
    Ok(DecayFit { gamma, log_power, rms, sup, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstantonOptions {
    pub n_theta: usize,
    pub n_torus: usize,
    /// Panel width in `ln r`.
    pub panel_width: f64,
    pub order: usize,
}

impl Default for InstantonOptions {
    fn default() -> Self {
        InstantonOptions { n_theta: 16, n_torus: 4, panel_width: 0.5, order: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstantonEstimate {
    /// `(1/8π²) ∫_{r_in ≤ r ≤ R} |F|²`.
    pub k: f64,
    /// Estimated contribution of `r > R` from the fitted decay.
    pub tail: f64,
    /// Decay exponent fitted near `R` (`−∞` if the curvature vanishes there).
    pub gamma: f64,
}

/// Instanton number over `r_inner ≤ r ≤ r_outer`: Gauss–Legendre in `ln r`,
/// trapezoid in the periodic directions.
pub fn instanton_number(conn: &dyn ConnectionSource, r_inner: f64, r_outer: f64, opts: &InstantonOptions) -> Result<InstantonEstimate> {
    if !(r_inner > 0.0 && r_outer > r_inner) {
        return Err(Error::InvalidParameter(format!("need 0 < r_inner < r_outer, got {r_inner}, {r_outer}")));
    }
    conn.domain().check(r_inner)?;
    conn.domain().check(r_outer)?;
    let t = conn.torus();
    let (s0, s1) = (r_inner.ln(), r_outer.ln());
    let panels = ((s1 - s0) / opts.panel_width).ceil().max(1.0) as usize;
    let nodes = composite_gauss(s0, s1, panels, opts.order);
    let cell = 2.0 * PI / opts.n_theta as f64 * t.area() / (opts.n_torus * opts.n_torus) as f64;
    let per_node: Result<Vec<f64>> = nodes
        .par_iter()
        .map(|&(s, w)| {
            let r = s.exp();
            let mut acc = 0.0;
            for i in 0..opts.n_theta {
                for j in 0..opts.n_torus {
                    for k in 0..opts.n_torus {
                        let p = Point::new(
                            r,
                            2.0 * PI * i as f64 / opts.n_theta as f64,
                            t.period_x * j as f64 / opts.n_torus as f64,
                            t.period_y * k as f64 / opts.n_torus as f64,
                        );
                        acc += curvature(conn, &p)?.norm_sqr_part(CurvaturePart::Full);
                    }
                }
            }
            // dr r = r² ds
            Ok(w * acc * cell * r * r)
        })
        .collect();
    let k = per_node?.iter().sum::<f64>() / (8.0 * PI * PI);
    // decay near the outer radius
    let radii: Vec<f64> = (0..4).map(|j| r_outer / 2f64.powi(3 - j)).filter(|&r| r >= r_inner).collect();
    let sups: Result<Vec<f64>> = radii.iter().map(|&r| ring_sup(conn, r, opts.n_theta, 2, CurvaturePart::Full)).collect();
    let sups = sups?;
    if radii.len() < 2 || sups.iter().all(|&s| s == 0.0) {
        return Ok(InstantonEstimate { k, tail: 0.0, gamma: f64::NEG_INFINITY });
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = sups.iter().map(|s| s.max(f64::MIN_POSITIVE).ln()).collect();
    let (c0, gamma, _) = linear_fit(&xs, &ys);
    if gamma > -1.05 {
        return Err(Error::DivergentTail { gamma });
    }
    // ∫_R^∞ C² r^{2γ} r dr · 2π·area / 8π²
    let cc = (2.0 * c0).exp();
    let tail = cc * r_outer.powf(2.0 * gamma + 2.0) / (-(2.0 * gamma + 2.0)) * 2.0 * PI * t.area() / (8.0 * PI * PI);
    Ok(InstantonEstimate { k, tail, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{Flat, Scaled};
    use crate::geometry::TorusSpec;
    use crate::models::{semisimple_model, ModelDomain, ModelParams};
    use crate::su2::c;

    fn decade() -> Vec<f64> {
        (0..8).map(|j| 5.0 * 10f64.powf(j as f64 / 7.0 * 2.0)).collect()
    }

    #[test]
    fn semisimple_decays_like_inverse_square() {
        let conn = semisimple_model(&ModelParams::semisimple(c(0.1, 0.0), c(1.0, -0.5), 0.2).unwrap(), &ModelDomain::default()).unwrap();
        let f = decay_exponent(conn.as_ref(), &decade(), &DecayOptions::default()).unwrap();
        assert!((f.gamma + 2.0).abs() < 1e-6 && f.monotone);
        let g = decay_exponent(conn.as_ref(), &decade(), &DecayOptions { log_power: true, ..Default::default() }).unwrap();
        assert!((g.gamma + 2.0).abs() < 0.05 && g.log_power.abs() < 0.2);
    }

    #[test]
    fn flat_gives_sentinel_and_zero_charge() {
        let flat = Flat::new(TorusSpec::default());
        let f = decay_exponent(&flat, &decade(), &DecayOptions::default()).unwrap();
        assert_eq!(f.gamma, f64::NEG_INFINITY);
        let k = instanton_number(&flat, 1.0, 100.0, &InstantonOptions::default()).unwrap();
        assert_eq!((k.k, k.tail), (0.0, 0.0));
        assert!(decay_exponent(&flat, &decade()[..5], &DecayOptions::default()).is_err());
    }

    #[test]
    fn semisimple_charge_closed_form() {
        // k = 2|μ|²·area·(r_in⁻² − R⁻²)/π
        let t = TorusSpec::default();
        let mu = c(1.0, 0.5);
        let conn = semisimple_model(&ModelParams::semisimple(c(0.0, 0.0), mu, 0.0).unwrap(), &ModelDomain::default()).unwrap();
        let est = instanton_number(conn.as_ref(), 2.0, 200.0, &InstantonOptions::default()).unwrap();
        let exact = 2.0 * mu.norm_sqr() * t.area() * (0.25 - 1.0 / 40000.0) / PI;
        assert!((est.k - exact).abs() < 1e-9 * exact, "{} vs {exact}", est.k);
        assert!((est.gamma + 2.0).abs() < 1e-6);
        let tail_exact = 2.0 * mu.norm_sqr() * t.area() / 40000.0 / PI;
        assert!((est.tail - tail_exact).abs() < 1e-6 * tail_exact);
        let wider = instanton_number(conn.as_ref(), 2.0, 400.0, &InstantonOptions::default()).unwrap();
        assert!(wider.k >= est.k);
    }

    #[test]
    fn doubling_the_density_doubles_the_charge() {
        // abelian model: scaling A by √2 doubles |F|²
        let base = semisimple_model(&ModelParams::semisimple(c(0.0, 0.0), c(1.0, 0.0), 0.0).unwrap(), &ModelDomain::default()).unwrap();
        let scaled = Scaled { base: base.clone(), factor: 2f64.sqrt() };
        let k1 = instanton_number(base.as_ref(), 2.0, 50.0, &InstantonOptions::default()).unwrap().k;
        let k2 = instanton_number(&scaled, 2.0, 50.0, &InstantonOptions::default()).unwrap().k;
        assert!((k2 - 2.0 * k1).abs() < 1e-9 * k1);
    }

    #[test]
    fn slow_decay_is_divergent() {
        use crate::gauge::{FnConnection, RadialDomain};
        use crate::su2::{diag_i, Mat2};
        // F_{rx} ~ r^{-1/2}
        let conn = FnConnection::new(TorusSpec::default(), RadialDomain::from(1.0), |p| {
            [Mat2::zeros(), Mat2::zeros(), diag_i(p.r.sqrt()), Mat2::zeros()]
        });
        assert!(matches!(instanton_number(&conn, 1.0, 100.0, &InstantonOptions::default()), Err(Error::DivergentTail { .. })));
    }
}
