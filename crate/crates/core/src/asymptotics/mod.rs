//! Asymptotic invariants read off from holonomies on large rings.
//!
//! On a ring of radius `r` the x- and y-circle holonomies of an asymptotically
//! flat connection are close to `exp(−i a_x L_x σ)` and `exp(−i a_y L_y σ)` in
//! a common frame, with `a_x + i a_y ≈ 2λ + 2μ/w`. The θ-circle holonomy
//! tends to `exp(−2πiα σ)`. All samples are projected onto one frame vector
//! `u`, phases are unwrapped, and `λ, μ, α` follow from least-squares fits.
//! Flipping `u` sends `(ξ₀, α, μ)` to `(−ξ₀, −α, −μ)`; results are reported
//! after [`canonicalize`].

mod decay;
mod perp;

pub use decay::{decay_exponent, instanton_number, DecayFit, DecayOptions, InstantonEstimate, InstantonOptions};
pub use perp::{perp_decompose, poincare_constant, TorusSection};

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen, Vector2, Vector3};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{holonomy, ConnectionSource, Point};
use crate::geometry::{lambda_to_xi, reduce_dual, DualTorusPoint, Loop, TorusSpec};
use crate::models::ModelKind;
use crate::numerics::{complex_lstsq, linear_fit, nearest_branch, unwrap_sequence};
use crate::su2::{frob_sqr, sigma1, sigma2, sigma3, Mat2, I};

/// Tolerance for deciding `ξ₀ = −ξ₀` and equality of canonical keys.
pub const ORDER_TWO_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractionOptions {
    /// Increasing ring radii, at least four.
    pub rings: Vec<f64>,
    /// θ samples per ring for torus holonomies.
    pub n_theta: usize,
    /// Transverse torus offsets per θ sample.
    pub n_transverse: usize,
    /// Holonomy steps per circle.
    pub steps: usize,
    /// Largest allowed RMS of the `1/r` fit of ring-averaged monodromy data.
    pub drift_threshold: f64,
    /// Largest allowed RMS of the `λ + μ/w` fit.
    pub fit_threshold: f64,
    /// Also estimate the instanton number up to the last ring.
    pub instanton: bool,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        ExtractionOptions {
            rings: vec![20.0, 40.0, 80.0, 160.0],
            n_theta: 32,
            n_transverse: 2,
            steps: 64,
            drift_threshold: 1e-3,
            fit_threshold: 1e-3,
            instanton: true,
        }
    }
}

impl ExtractionOptions {
    pub fn with_rings(rings: &[f64]) -> Self {
        ExtractionOptions { rings: rings.to_vec(), ..Default::default() }
    }

    fn validate(&self, conn: &dyn ConnectionSource) -> Result<()> {
        if self.rings.len() < 4 {
            return Err(Error::InvalidParameter(format!("need at least 4 rings, got {}", self.rings.len())));
        }
        if self.rings.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("rings must be strictly increasing".into()));
        }
        for &r in &self.rings {
            conn.domain().check(r)?;
        }
        if self.n_theta < 8 || self.n_transverse == 0 || self.steps < 16 {
            return Err(Error::InvalidParameter("need n_theta >= 8, n_transverse >= 1, steps >= 16".into()));
        }
        Ok(())
    }
}

/// Holonomies sampled on one ring.
#[derive(Debug, Clone)]
struct Ring {
    r: f64,
    thetas: Vec<f64>,
    /// `[θ index][transverse index]`
    x_hol: Vec<Vec<Mat2>>,
    y_hol: Vec<Vec<Mat2>>,
    /// θ-circle holonomies at `n_transverse²` torus points.
    theta_hol: Vec<Mat2>,
    /// `sup |A − A_flat|` needs the frame, so the potentials are kept.
    potentials: Vec<(Point, [Mat2; 4])>,
}

fn sample_ring(conn: &dyn ConnectionSource, r: f64, o: &ExtractionOptions) -> Result<Ring> {
    let t = conn.torus();
    let nt = o.n_transverse;
    let thetas: Vec<f64> = (0..o.n_theta).map(|j| 2.0 * PI * j as f64 / o.n_theta as f64).collect();
    let offs = |p: f64| -> Vec<f64> { (0..nt).map(|k| p * k as f64 / nt as f64).collect() };
    let ys = offs(t.period_y);
    let xs = offs(t.period_x);
    let mut x_hol = Vec::with_capacity(o.n_theta);
    let mut y_hol = Vec::with_capacity(o.n_theta);
    for &th in &thetas {
        let mut hx = Vec::with_capacity(nt);
        let mut hy = Vec::with_capacity(nt);
        for k in 0..nt {
            hx.push(*holonomy(conn, &Loop::x_circle(Point::new(r, th, 0.0, ys[k]), 16)?, o.steps)?.matrix());
            hy.push(*holonomy(conn, &Loop::y_circle(Point::new(r, th, xs[k], 0.0), 16)?, o.steps)?.matrix());
        }
        x_hol.push(hx);
        y_hol.push(hy);
    }
    let theta_steps = o.steps.max(4 * o.n_theta);
    let mut theta_hol = Vec::with_capacity(nt * nt);
    let mut potentials = Vec::new();
    for &x in &xs {
        for &y in &ys {
            theta_hol.push(*holonomy(conn, &Loop::theta_circle(Point::new(r, 0.0, x, y), 16)?, theta_steps)?.matrix());
            for &th in &thetas {
                let p = Point::new(r, th, x, y);
                potentials.push((p, conn.eval(&p)));
            }
        }
    }
    Ok(Ring { r, thetas, x_hol, y_hol, theta_hol, potentials })
}

fn sample_rings(conn: &dyn ConnectionSource, o: &ExtractionOptions) -> Result<Vec<Ring>> {
    o.validate(conn)?;
    o.rings.par_iter().map(|&r| sample_ring(conn, r, o)).collect()
}

/// `v` with `M = c₀ + i v·σ` for `M ∈ SU(2)`.
fn axis_vector(m: &Mat2) -> Vector3<f64> {
    let s = [sigma1(), sigma2(), sigma3()];
    Vector3::from_fn(|k, _| (m * s[k]).trace().im / 2.0)
}

/// The common frame: `n̂` and the `+1` eigenvector `u` of `n̂·σ`.
#[derive(Debug, Clone, Copy)]
struct Frame {
    n: Vector3<f64>,
    u: Vector2<C64>,
}

impl Frame {
    fn from_rings(rings: &[Ring]) -> Frame {
        let mut t = Matrix3::<f64>::zeros();
        let mut add = |m: &Mat2| {
            let v = axis_vector(m);
            t += v * v.transpose();
        };
        for ring in rings {
            ring.x_hol.iter().chain(&ring.y_hol).flatten().for_each(&mut add);
            ring.theta_hol.iter().for_each(&mut add);
        }
        let n = if t.norm() < 1e-24 {
            Vector3::new(0.0, 0.0, 1.0)
        } else {
            let e = SymmetricEigen::new(t);
            let i = e.eigenvalues.imax();
            let mut n: Vector3<f64> = e.eigenvectors.column(i).into();
            let j = n.iamax();
            if n[j] < 0.0 {
                n = -n;
            }
            n
        };
        Frame::new(n)
    }

    fn new(n: Vector3<f64>) -> Frame {
        let (a, b) = if n[2] > -0.5 {
            (C64::new(1.0 + n[2], 0.0), C64::new(n[0], n[1]))
        } else {
            (C64::new(n[0], -n[1]), C64::new(1.0 - n[2], 0.0))
        };
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        Frame { n, u: Vector2::new(a / norm, b / norm) }
    }

    /// `u† M u`.
    fn project(&self, m: &Mat2) -> C64 {
        let mu = m * self.u;
        self.u[0].conj() * mu[0] + self.u[1].conj() * mu[1]
    }

    /// `i n̂·σ`, the generator the flat limit is proportional to.
    fn generator(&self) -> Mat2 {
        (sigma1() * C64::new(self.n[0], 0.0) + sigma2() * C64::new(self.n[1], 0.0) + sigma3() * C64::new(self.n[2], 0.0)) * I
    }
}

/// Smallest `|u† M u|` seen; below this the eigenvalue branch is ambiguous.
const MIN_OVERLAP: f64 = 0.5;

fn phase(frame: &Frame, m: &Mat2, what: &str) -> Result<f64> {
    let z = frame.project(m);
    if z.norm() < MIN_OVERLAP {
        return Err(Error::BranchAmbiguous(format!("{what}: |u^dagger M u| = {:.3e}", z.norm())));
    }
    Ok(z.arg())
}

/// Unwrapped local `a` values on one ring for one circle family:
/// `[θ index]` averaged over transverse offsets.
fn ring_values(frame: &Frame, hol: &[Vec<Mat2>], length: f64, what: &str) -> Result<Vec<f64>> {
    let mut per_theta = Vec::with_capacity(hol.len());
    let nt = hol[0].len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(hol.len()); nt];
    for row in hol {
        for (k, m) in row.iter().enumerate() {
            columns[k].push(phase(frame, m, what)?);
        }
    }
    let reference = columns[0][0];
    let columns: Vec<Vec<f64>> = columns.iter().map(|c| unwrap_sequence(c, 2.0 * PI, reference)).collect();
    for j in 0..hol.len() {
        let s: f64 = columns.iter().map(|c| c[j]).sum();
        per_theta.push(-s / nt as f64 / length);
    }
    Ok(per_theta)
}

/// Flat limit `Γ = i(λ₁ dx + λ₂ dy)·n̂σ` at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatLimit {
    /// `(λ₁, λ₂)`, each in `(−π/L_j, π/L_j]`.
    pub gamma: [f64; 2],
    pub rings: Vec<f64>,
    /// Ring-averaged `a_x`, `a_y` (on a common branch).
    pub ring_means: Vec<[f64; 2]>,
    /// Per-ring, per-θ monodromy eigenvalue phases `(arg_x, arg_y)`.
    pub eigenvalue_phases: Vec<Vec<[f64; 2]>>,
    /// RMS of the `1/r` fits of the ring means.
    pub drift: [f64; 2],
    #[serde(skip)]
    frame_axis: [f64; 3],
    #[serde(skip)]
    samples: Vec<(C64, C64)>,
}

impl FlatLimit {
    /// `(λ₁ + iλ₂)/2` in model units.
    pub fn lambda(&self) -> C64 {
        C64::new(self.gamma[0], self.gamma[1]) / 2.0
    }

    pub fn xi(&self, torus: &TorusSpec) -> DualTorusPoint {
        reduce_dual(lambda_to_xi(self.gamma, torus), torus)
    }
}

fn flat_limit_from(rings: &[Ring], frame: &Frame, torus: &TorusSpec, o: &ExtractionOptions) -> Result<FlatLimit> {
    let mut ring_means: Vec<[f64; 2]> = Vec::with_capacity(rings.len());
    let mut eigenvalue_phases = Vec::with_capacity(rings.len());
    let mut samples = Vec::new();
    let mut prev: Option<[f64; 2]> = None;
    for ring in rings {
        let mut ax = ring_values(frame, &ring.x_hol, torus.period_x, "x-circle monodromy")?;
        let mut ay = ring_values(frame, &ring.y_hol, torus.period_y, "y-circle monodromy")?;
        let n = ax.len() as f64;
        let mut mean = [ax.iter().sum::<f64>() / n, ay.iter().sum::<f64>() / n];
        if let Some(p) = prev {
            for (k, vals) in [&mut ax, &mut ay].into_iter().enumerate() {
                let period = 2.0 * PI / torus.period(k);
                let shifted = nearest_branch(mean[k], period, p[k]);
                let shift = shifted - mean[k];
                vals.iter_mut().for_each(|v| *v += shift);
                mean[k] = shifted;
            }
        }
        prev = Some(mean);
        ring_means.push(mean);
        eigenvalue_phases.push((0..ax.len()).map(|j| [-ax[j] * torus.period_x, -ay[j] * torus.period_y]).collect());
        for (j, &th) in ring.thetas.iter().enumerate() {
            samples.push((C64::from_polar(ring.r, th), C64::new(ax[j], ay[j])));
        }
    }
    let inv: Vec<f64> = rings.iter().map(|r| 1.0 / r.r).collect();
    let mut gamma = [0.0; 2];
    let mut drift = [0.0; 2];
    for k in 0..2 {
        let ys: Vec<f64> = ring_means.iter().map(|m| m[k]).collect();
        let (c0, _, rms) = linear_fit(&inv, &ys);
        let period = 2.0 * PI / torus.period(k);
        let reduced = nearest_branch(c0, period, 0.0);
        // shift every stored value by the same multiple of the period
        let shift = reduced - c0;
        if shift != 0.0 {
            for m in ring_means.iter_mut() {
                m[k] += shift;
            }
            for s in samples.iter_mut() {
                if k == 0 {
                    s.1.re += shift;
                } else {
                    s.1.im += shift;
                }
            }
        }
        gamma[k] = if reduced <= -period / 2.0 { reduced + period } else { reduced };
        drift[k] = rms;
        if rms > o.drift_threshold {
            return Err(Error::NonConverging { drift: rms, threshold: o.drift_threshold });
        }
    }
    Ok(FlatLimit {
        gamma,
        rings: rings.iter().map(|r| r.r).collect(),
        ring_means,
        eigenvalue_phases,
        drift,
        frame_axis: [frame.n[0], frame.n[1], frame.n[2]],
        samples,
    })
}

/// Flat limit at infinity from x- and y-circle monodromies on `opts.rings`.
pub fn flat_limit(conn: &dyn ConnectionSource, opts: &ExtractionOptions) -> Result<FlatLimit> {
    let rings = sample_rings(conn, opts)?;
    let frame = Frame::from_rings(&rings);
    flat_limit_from(&rings, &frame, &conn.torus(), opts)
}

/// The unordered pair `±ξ₀`, with `xi0` the canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticStates {
    pub xi0: DualTorusPoint,
    pub minus_xi0: DualTorusPoint,
    pub order_two: bool,
}

fn key(v: f64) -> f64 {
    if v > 1.0 - ORDER_TWO_TOL {
        0.0
    } else {
        v
    }
}

/// `true` if `−ξ` precedes `ξ` in the lexicographic fundamental domain.
fn prefers_negative(xi: &DualTorusPoint, torus: &TorusSpec) -> Option<bool> {
    let neg = xi.neg(torus);
    for k in 0..2 {
        let (a, b) = (key(xi.xi[k]), key(neg.xi[k]));
        if (a - b).abs() > ORDER_TWO_TOL {
            return Some(b < a);
        }
    }
    None
}

pub fn asymptotic_states(fl: &FlatLimit, torus: &TorusSpec) -> AsymptoticStates {
    states_of(&fl.xi(torus), torus)
}

pub fn states_of(xi: &DualTorusPoint, torus: &TorusSpec) -> AsymptoticStates {
    let (xi0, minus) = match prefers_negative(xi, torus) {
        Some(true) => (xi.neg(torus), *xi),
        _ => (*xi, xi.neg(torus)),
    };
    AsymptoticStates { xi0, minus_xi0: minus, order_two: xi.is_order_two(ORDER_TWO_TOL) }
}

fn wrap_alpha(a: f64) -> f64 {
    if (-0.5..0.5).contains(&a) {
        return a;
    }
    let w = (a + 0.5).rem_euclid(1.0) - 0.5;
    if w >= 0.5 {
        -0.5
    } else {
        w
    }
}

/// Joint sign choice for `(ξ₀, α, μ)`: `ξ₀` in the lexicographic fundamental
/// domain; if `ξ₀ = −ξ₀`, `α > 0`; if also `α ∈ {0, −½}`, `Re μ > 0` (or
/// `Re μ = 0`, `Im μ ≥ 0`).
pub fn canonicalize(xi: &DualTorusPoint, alpha: f64, mu: C64, torus: &TorusSpec) -> (DualTorusPoint, f64, C64) {
    let flip = match prefers_negative(xi, torus) {
        Some(f) => f,
        None => {
            let a = wrap_alpha(alpha);
            let degenerate = a.abs() <= ORDER_TWO_TOL || (a + 0.5).abs() <= ORDER_TWO_TOL;
            if !degenerate {
                a < 0.0
            } else if mu.re.abs() > 1e-12 {
                mu.re < 0.0
            } else {
                mu.im < 0.0
            }
        }
    };
    if flip {
        (xi.neg(torus), wrap_alpha(-alpha), -mu)
    } else {
        (*xi, wrap_alpha(alpha), mu)
    }
}

fn alpha_from(rings: &[Ring], frame: &Frame, o: &ExtractionOptions) -> Result<(f64, f64)> {
    let mut per_ring = Vec::with_capacity(rings.len());
    let mut prev: Option<f64> = None;
    for ring in rings {
        let phases: Result<Vec<f64>> = ring.theta_hol.iter().map(|m| phase(frame, m, "theta-circle holonomy")).collect();
        let phases = phases?;
        let u = unwrap_sequence(&phases, 2.0 * PI, prev.map_or(phases[0], |a| -2.0 * PI * a));
        let a = -u.iter().sum::<f64>() / u.len() as f64 / (2.0 * PI);
        let a = match prev {
            Some(p) => nearest_branch(a, 1.0, p),
            None => a,
        };
        prev = Some(a);
        per_ring.push(a);
    }
    let inv: Vec<f64> = rings.iter().map(|r| 1.0 / r.r).collect();
    let (c0, _, rms) = linear_fit(&inv, &per_ring);
    if rms > o.drift_threshold {
        return Err(Error::NonConverging { drift: rms, threshold: o.drift_threshold });
    }
    Ok((wrap_alpha(c0), rms))
}

/// Limiting holonomy `α ∈ [−½, ½)` from θ-circle holonomies, extrapolated in `1/r`.
/// The sign is relative to the frame fixed by the torus monodromies; see
/// [`canonicalize`].
pub fn limiting_holonomy(conn: &dyn ConnectionSource, opts: &ExtractionOptions) -> Result<f64> {
    let rings = sample_rings(conn, opts)?;
    let frame = Frame::from_rings(&rings);
    Ok(alpha_from(&rings, &frame, opts)?.0)
}

/// `(λ, μ, rms)` from the fit `a_x + i a_y ≈ 2λ + 2μ/w` over all samples.
fn residue_fit(fl: &FlatLimit, o: &ExtractionOptions) -> Result<(C64, C64, f64)> {
    let rows: Vec<Vec<C64>> = fl.samples.iter().map(|(w, _)| vec![C64::new(1.0, 0.0), 1.0 / w]).collect();
    let rhs: Vec<C64> = fl.samples.iter().map(|s| s.1).collect();
    let (c, rms) = complex_lstsq(&rows, &rhs);
    if rms > o.fit_threshold {
        return Err(Error::FitResidual { residual: rms, threshold: o.fit_threshold });
    }
    Ok((c[0] / 2.0, c[1] / 2.0, rms))
}

/// Residue `μ` (model units: `ζ(w) = i(λ + μ/w)`), frame-relative sign.
pub fn residue(conn: &dyn ConnectionSource, opts: &ExtractionOptions) -> Result<C64> {
    let fl = flat_limit(conn, opts)?;
    Ok(residue_fit(&fl, opts)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// RMS of the `1/r` fits for `λ₁, λ₂`.
    pub flat_drift: [f64; 2],
    pub alpha_drift: f64,
    pub residue_rms: f64,
    /// Smallest `|u† M u|` over all holonomy samples.
    pub min_overlap: f64,
    /// `r ln r · sup |A − A_flat|` per ring.
    pub nilpotent_scale: Vec<f64>,
    /// Raw (frame-relative) `λ` before canonicalization, model units.
    #[serde(with = "crate::serde_complex")]
    pub lambda: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticInvariants {
    pub xi0: DualTorusPoint,
    pub order_two: bool,
    pub alpha: f64,
    #[serde(with = "crate::serde_complex")]
    pub mu: C64,
    pub k_estimate: f64,
    pub kind: ModelKind,
    pub diagnostics: FitDiagnostics,
}

fn nilpotent_scale(rings: &[Ring], frame: &Frame, fl: &FlatLimit) -> Vec<f64> {
    let g = frame.generator();
    let flat = [Mat2::zeros(), Mat2::zeros(), g * C64::new(fl.gamma[0], 0.0), g * C64::new(fl.gamma[1], 0.0)];
    rings
        .iter()
        .map(|ring| {
            let sup = ring
                .potentials
                .iter()
                .map(|(_, a)| (frob_sqr(&(a[2] - flat[2])) + frob_sqr(&(a[3] - flat[3]))).sqrt())
                .fold(0.0, f64::max);
            sup * ring.r * ring.r.ln()
        })
        .collect()
}

/// Nilpotent regime: trivial flat limit and `s(r) = r ln r·sup|A_T − A_flat|`
/// (torus components only) constant across the rings. A residue term
/// instead gives `s ∝ ln r`, so the ring ratio of `s` must sit closer to 1
/// than to `ln r_last / ln r_first`.
fn looks_nilpotent(xi: &DualTorusPoint, rings: &[f64], scale: &[f64]) -> bool {
    let (first, last) = (scale[0], scale[scale.len() - 1]);
    let trivial = xi.torus_distance(&DualTorusPoint { xi: [0.0, 0.0], zeta: C64::new(0.0, 0.0) }) < 1e-3;
    let log_growth = (rings[rings.len() - 1].ln() / rings[0].ln()).ln();
    trivial && last > 1e-4 && (last / first).ln().abs() < 0.5 * log_growth
}

/// All asymptotic invariants of `conn`, canonicalized.
pub fn extract(conn: &dyn ConnectionSource, opts: &ExtractionOptions) -> Result<AsymptoticInvariants> {
    let torus = conn.torus();
    let rings = sample_rings(conn, opts)?;
    let frame = Frame::from_rings(&rings);
    let fl = flat_limit_from(&rings, &frame, &torus, opts)?;
    let min_overlap = rings
        .iter()
        .flat_map(|r| r.x_hol.iter().chain(&r.y_hol).flatten().chain(&r.theta_hol))
        .map(|m| frame.project(m).norm())
        .fold(f64::INFINITY, f64::min);
    let scale = nilpotent_scale(&rings, &frame, &fl);
    let xi_raw = fl.xi(&torus);
    let k_estimate = if opts.instanton {
        let r_in = conn.domain().r_min.max(1e-3);
        instanton_number(conn, r_in, *opts.rings.last().unwrap(), &InstantonOptions::default())?.k
    } else {
        0.0
    };
    let mut diagnostics = FitDiagnostics {
        flat_drift: fl.drift,
        alpha_drift: 0.0,
        residue_rms: 0.0,
        min_overlap,
        nilpotent_scale: scale.clone(),
        lambda: fl.lambda(),
    };
    if looks_nilpotent(&xi_raw, &opts.rings, &scale) {
        return Ok(AsymptoticInvariants {
            xi0: reduce_dual([0.0, 0.0], &torus),
            order_two: true,
            alpha: 0.0,
            mu: C64::new(0.0, 0.0),
            k_estimate,
            kind: ModelKind::Nilpotent,
            diagnostics,
        });
    }
    let (alpha, alpha_drift) = alpha_from(&rings, &frame, opts)?;
    let (_, mu, rms) = residue_fit(&fl, opts)?;
    diagnostics.alpha_drift = alpha_drift;
    diagnostics.residue_rms = rms;
    let (xi0, alpha, mu) = canonicalize(&xi_raw, alpha, mu, &torus);
    Ok(AsymptoticInvariants {
        order_two: xi0.is_order_two(ORDER_TWO_TOL),
        xi0,
        alpha,
        mu,
        k_estimate,
        kind: ModelKind::Semisimple,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{ConstantGauge, Flat};
    use crate::models::{nilpotent_model, perturb, semisimple_model, ModelDomain, ModelParams};
    use crate::su2::{c, random_unit_su2, Su2Element};
    use rand::SeedableRng;

    fn model(l: C64, m: C64, a: f64) -> crate::gauge::Connection {
        semisimple_model(&ModelParams::semisimple(l, m, a).unwrap(), &ModelDomain::default()).unwrap()
    }

    fn opts(rings: &[f64]) -> ExtractionOptions {
        ExtractionOptions { instanton: false, ..ExtractionOptions::with_rings(rings) }
    }

    #[test]
    fn flat_limit_of_model() {
        let conn = model(c(0.1, 0.2), c(1.0, 0.0), 0.3);
        let fl = flat_limit(conn.as_ref(), &opts(&[50.0, 100.0, 200.0, 400.0])).unwrap();
        assert!((fl.gamma[0] - 0.2).abs() < 1e-6 && (fl.gamma[1] - 0.4).abs() < 1e-6, "{:?}", fl.gamma);
        let flat = flat_limit(&Flat::new(TorusSpec::default()), &opts(&[50.0, 100.0, 200.0, 400.0])).unwrap();
        assert_eq!(flat.gamma, [0.0, 0.0]);
    }

    #[test]
    fn flat_limit_survives_perturbation() {
        let conn = perturb(model(c(0.1, 0.2), c(1.0, 0.0), 0.3), 0.5, 0.05, 3).unwrap();
        let fl = flat_limit(conn.as_ref(), &opts(&[50.0, 100.0, 200.0, 400.0])).unwrap();
        assert!((fl.gamma[0] - 0.2).abs() < 1e-3 && (fl.gamma[1] - 0.4).abs() < 1e-3, "{:?}", fl.gamma);
    }

    #[test]
    fn asymptotic_state_examples() {
        let t = TorusSpec::default();
        let zero = states_of(&reduce_dual([0.0, 0.0], &t), &t);
        assert!(zero.order_two);
        let half = states_of(&reduce_dual([0.5, 0.5], &t), &t);
        assert!(half.order_two);
        let s = states_of(&reduce_dual([0.7, 0.2], &t), &t);
        assert!(!s.order_two);
        assert!((s.xi0.xi[0] - 0.3).abs() < 1e-12 && (s.xi0.xi[1] - 0.8).abs() < 1e-12);
        let s = states_of(&reduce_dual([0.2, 0.4], &t), &t);
        assert_eq!(s.xi0.xi, [0.2, 0.4]);
    }

    #[test]
    fn alpha_examples() {
        let o = opts(&[20.0, 40.0, 80.0, 160.0]);
        let a = limiting_holonomy(model(c(0.0, 0.0), c(0.0, 0.0), 0.25).as_ref(), &o).unwrap();
        assert!((a.abs() - 0.25).abs() < 1e-8);
        let a = limiting_holonomy(model(c(0.0, 0.0), c(0.0, 0.0), 0.0).as_ref(), &o).unwrap();
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn alpha_is_gauge_covariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let g = Su2Element::exp(&random_unit_su2(&mut rng));
        let base = model(c(0.1, 0.0), c(0.5, 0.5), 0.3);
        let o = opts(&[20.0, 40.0, 80.0, 160.0]);
        let a0 = extract(base.as_ref(), &o).unwrap();
        let a1 = extract(&ConstantGauge { base, g }, &o).unwrap();
        assert!((a0.alpha - a1.alpha).abs() < 1e-10);
        assert!((a0.mu - a1.mu).norm() < 1e-8);
    }

    #[test]
    fn residue_examples() {
        let o = opts(&[20.0, 40.0, 80.0, 160.0]);
        let m = residue(model(c(0.0, 0.0), c(1.0, 0.0), 0.0).as_ref(), &o).unwrap();
        assert!((m.norm() - 1.0).abs() < 1e-4 && m.im.abs() < 1e-4);
        let m = residue(model(c(0.1, 0.0), c(0.0, 0.0), 0.0).as_ref(), &o).unwrap();
        assert!(m.norm() < 1e-6);
    }

    #[test]
    fn canonicalization_rules() {
        let t = TorusSpec::default();
        let z = reduce_dual([0.0, 0.0], &t);
        let (_, a, m) = canonicalize(&z, -0.3, c(1.0, 0.0), &t);
        assert_eq!(a, 0.3);
        assert_eq!(m, -c(1.0, 0.0));
        let (_, a, m) = canonicalize(&z, 0.0, c(-1.0, 2.0), &t);
        assert_eq!((a, m), (0.0, c(1.0, -2.0)));
        let (_, a, _) = canonicalize(&z, -0.5, c(1.0, 0.0), &t);
        assert_eq!(a, -0.5);
        let (x, a, m) = canonicalize(&reduce_dual([0.8, 0.1], &t), 0.2, c(1.0, 1.0), &t);
        assert!((x.xi[0] - 0.2).abs() < 1e-12 && a == -0.2 && m == c(-1.0, -1.0));
    }

    #[test]
    fn nilpotent_is_recognised() {
        let conn = nilpotent_model(&ModelDomain::default()).unwrap();
        let inv = extract(conn.as_ref(), &opts(&[100.0, 400.0, 1600.0, 6400.0])).unwrap();
        assert_eq!(inv.kind, ModelKind::Nilpotent);
        let ss = extract(model(c(0.0, 0.0), c(1.0, 0.0), 0.0).as_ref(), &opts(&[100.0, 400.0, 1600.0, 6400.0])).unwrap();
        assert_eq!(ss.kind, ModelKind::Semisimple);
    }

    #[test]
    fn too_few_rings() {
        assert!(flat_limit(&Flat::new(TorusSpec::default()), &opts(&[1.0, 2.0, 3.0])).is_err());
        assert!(flat_limit(&Flat::new(TorusSpec::default()), &opts(&[1.0, 3.0, 2.0, 4.0])).is_err());
    }
}
