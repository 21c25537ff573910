//! Dimensional reduction between torus-invariant connections and Hitchin pairs.
//!
//! A torus-invariant connection `A = B + ψ₀ dx + ψ₁ dy` corresponds to the
//! pair `(B, ψ)` with `ψ = ψ_w dw`, `ψ_w = ½(ψ₀ + iψ₁)`; conversely
//! `ψ₀ = ψ_w − ψ_w†`, `ψ₁ = −i(ψ_w + ψ_w†)`.
//!
//! Hitchin residuals at `w = r e^{iθ}`:
//! * `h₁ = |F_B + [ψ, ψ*]|`, the coefficient of `dw₁ ∧ dw₂`, i.e.
//!   `|(∂_r B_θ − ∂_θ B_r + [B_r, B_θ])/r − 2i[ψ_w, ψ_w†]|`;
//! * `h₂ = |∂̄_B ψ| = 2|∂_w̄ ψ_w + [B_w̄, ψ_w]|` (the form `dw̄ ∧ dw` has norm 2).
//!
//! With these normalizations `|F⁺_A|² = ½h₁² + 2h₂²` for the lifted connection.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{potential, Connection, ConnectionSource, OneForm, Point, RadialDomain};
use crate::geometry::TorusSpec;
use crate::numerics::{richardson_derivative, Linear};
use crate::su2::{comm, frob, Mat2, I};

/// `(B_r, B_θ, ψ_w)` at a point of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiggsSample {
    pub b_r: Mat2,
    pub b_theta: Mat2,
    pub psi_w: Mat2,
}

impl Linear for HiggsSample {
    fn lin(&self, a: f64, o: &Self, b: f64) -> Self {
        HiggsSample {
            b_r: self.b_r.lin(a, &o.b_r, b),
            b_theta: self.b_theta.lin(a, &o.b_theta, b),
            psi_w: self.psi_w.lin(a, &o.psi_w, b),
        }
    }
}

/// A Hitchin pair on a punctured plane region `|w| ≥ r_min`.
pub trait HiggsSource: Send + Sync + fmt::Debug {
    fn r_min(&self) -> f64;

    fn eval(&self, r: f64, theta: f64) -> HiggsSample;

    /// `[∂_r, ∂_θ]` of the sample, when known exactly.
    fn jacobian(&self, _r: f64, _theta: f64) -> Option<[HiggsSample; 2]> {
        None
    }
}

/// A Hitchin pair together with the torus it is lifted over.
#[derive(Debug, Clone)]
pub struct HiggsPairOnPlane {
    pub source: Arc<dyn HiggsSource>,
    pub torus: TorusSpec,
}

impl HiggsPairOnPlane {
    pub fn new(source: Arc<dyn HiggsSource>, torus: TorusSpec) -> Self {
        HiggsPairOnPlane { source, torus }
    }

    pub fn sample(&self, r: f64, theta: f64) -> Result<HiggsSample> {
        self.check(r)?;
        Ok(self.source.eval(r, theta))
    }

    fn check(&self, r: f64) -> Result<()> {
        if r == 0.0 {
            return Err(Error::AtPole);
        }
        RadialDomain::from(self.source.r_min()).check(r)
    }

    /// `[∂_r, ∂_θ]`, exact when available, otherwise Richardson differences.
    pub fn derivatives(&self, r: f64, theta: f64) -> Result<[HiggsSample; 2]> {
        self.check(r)?;
        if let Some(j) = self.source.jacobian(r, theta) {
            return Ok(j);
        }
        let hr = 1e-2 * r;
        if r - 2.0 * hr <= 0.0 {
            return Err(Error::DegenerateStep(hr));
        }
        let dr = richardson_derivative(|s| self.source.eval(s, theta), r, hr);
        let dt = richardson_derivative(|s| self.source.eval(r, s), theta, 1e-2);
        Ok([dr, dt])
    }
}

/// Closure-backed pair.
#[derive(Clone)]
pub struct FnHiggs {
    pub r_min: f64,
    pub f: Arc<dyn Fn(f64, f64) -> HiggsSample + Send + Sync>,
}

impl fmt::Debug for FnHiggs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnHiggs").field("r_min", &self.r_min).finish()
    }
}

impl HiggsSource for FnHiggs {
    fn r_min(&self) -> f64 {
        self.r_min
    }
    fn eval(&self, r: f64, theta: f64) -> HiggsSample {
        (self.f)(r, theta)
    }
}

/// The pair read off a connection at a fixed torus point.
#[derive(Debug, Clone)]
struct Reduced {
    conn: Connection,
}

impl HiggsSource for Reduced {
    fn r_min(&self) -> f64 {
        self.conn.domain().r_min
    }

    fn eval(&self, r: f64, theta: f64) -> HiggsSample {
        from_components(&self.conn.eval(&Point::new(r, theta, 0.0, 0.0)))
    }

    fn jacobian(&self, r: f64, theta: f64) -> Option<[HiggsSample; 2]> {
        let j = self.conn.jacobian(&Point::new(r, theta, 0.0, 0.0))?;
        Some([from_components(&j[0]), from_components(&j[1])])
    }
}

fn from_components(a: &OneForm) -> HiggsSample {
    HiggsSample { b_r: a[0], b_theta: a[1], psi_w: (a[2] + a[3] * I) * C64::new(0.5, 0.0) }
}

fn to_components(s: &HiggsSample) -> OneForm {
    let pd = s.psi_w.adjoint();
    [s.b_r, s.b_theta, s.psi_w - pd, (s.psi_w + pd) * (-I)]
}

/// The torus-invariant connection `B + ψ₀ dx + ψ₁ dy`.
#[derive(Debug, Clone)]
pub struct LiftedConnection {
    pair: HiggsPairOnPlane,
}

impl ConnectionSource for LiftedConnection {
    fn torus(&self) -> TorusSpec {
        self.pair.torus
    }

    fn domain(&self) -> RadialDomain {
        RadialDomain::from(self.pair.source.r_min())
    }

    fn eval(&self, p: &Point) -> OneForm {
        to_components(&self.pair.source.eval(p.r, p.theta))
    }

    fn jacobian(&self, p: &Point) -> Option<[OneForm; 4]> {
        let [dr, dt] = self.pair.source.jacobian(p.r, p.theta)?;
        Some([to_components(&dr), to_components(&dt), [Mat2::zeros(); 4], [Mat2::zeros(); 4]])
    }

    fn higgs_pair(&self) -> Option<HiggsPairOnPlane> {
        Some(self.pair.clone())
    }
}

pub fn lift(pair: &HiggsPairOnPlane) -> Connection {
    Arc::new(LiftedConnection { pair: pair.clone() })
}

/// Largest deviation of the potential from its value at `(x, y) = (0, 0)`
/// over a 4×4 torus grid at a few plane points.
pub fn torus_invariance_defect(conn: &dyn ConnectionSource) -> Result<f64> {
    let d = conn.domain();
    let t = conn.torus();
    let mut radii: Vec<f64> = [1.5, 3.0, 10.0].iter().map(|f| d.r_min.max(1e-3) * f).collect();
    radii.retain(|r| *r <= d.r_max);
    if radii.is_empty() {
        radii.push(0.5 * (d.r_min + d.r_max));
    }
    let mut worst: f64 = 0.0;
    for &r in &radii {
        for th in [0.0, 2.1, 4.2] {
            let a0 = potential(conn, &Point::new(r, th, 0.0, 0.0))?;
            for i in 0..4 {
                for j in 0..4 {
                    let p = Point::new(r, th, t.period_x * i as f64 / 4.0 + 0.1, t.period_y * j as f64 / 4.0 + 0.07);
                    let a = conn.eval(&p);
                    for k in 0..4 {
                        worst = worst.max(frob(&(a[k] - a0[k])));
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// The Hitchin pair of a torus-invariant connection.
pub fn reduce(conn: &Connection, tolerance: f64) -> Result<HiggsPairOnPlane> {
    if let Some(p) = conn.higgs_pair() {
        return Ok(p);
    }
    let dev = torus_invariance_defect(conn.as_ref())?;
    if dev > tolerance {
        return Err(Error::NotTorusInvariant { max_deviation: dev, tolerance });
    }
    Ok(HiggsPairOnPlane::new(Arc::new(Reduced { conn: conn.clone() }), conn.torus()))
}

/// The matrix `F_B + [ψ, ψ*]` (coefficient of `dw₁∧dw₂`) and `∇_w̄ ψ_w`.
pub fn hitchin_terms(pair: &HiggsPairOnPlane, r: f64, theta: f64) -> Result<(Mat2, Mat2)> {
    let s = pair.sample(r, theta)?;
    let [dr, dt] = pair.derivatives(r, theta)?;
    let fb = (dr.b_theta - dt.b_r + comm(&s.b_r, &s.b_theta)) * C64::new(1.0 / r, 0.0);
    let first = fb + comm(&s.psi_w, &s.psi_w.adjoint()) * C64::new(0.0, -2.0);
    let e = C64::from_polar(0.5, theta);
    let dbar_psi = (dr.psi_w + dt.psi_w * C64::new(0.0, 1.0 / r)) * e;
    let b_wbar = (s.b_r + s.b_theta * C64::new(0.0, 1.0 / r)) * e;
    Ok((first, dbar_psi + comm(&b_wbar, &s.psi_w)))
}

/// `(|F_B + [ψ,ψ*]|, |∂̄_B ψ|)` at `w = r e^{iθ}`.
pub fn hitchin_residual(pair: &HiggsPairOnPlane, r: f64, theta: f64) -> Result<(f64, f64)> {
    let (a, b) = hitchin_terms(pair, r, theta)?;
    Ok((frob(&a), 2.0 * frob(&b)))
}

/// `|F⁺|² = C₁ h₁² + C₂ h₂²` for the lift of any pair.
pub const REDUCTION_CONSTANTS: (f64, f64) = (0.5, 2.0);

/// Sampled pair on an `(r, θ)` grid with bilinear interpolation, serialized
/// in the connection schema with `"reduced": true` and components
/// `b_r, b_theta, psi_w`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledHiggsJson {
    pub schema: String,
    pub reduced: bool,
    pub torus: TorusSpec,
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub components: Vec<String>,
    pub data: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
struct SampledHiggs {
    radii: Vec<f64>,
    n_theta: usize,
    values: Vec<HiggsSample>,
}

impl HiggsSource for SampledHiggs {
    fn r_min(&self) -> f64 {
        self.radii[0]
    }

    fn eval(&self, r: f64, theta: f64) -> HiggsSample {
        let n = self.radii.len();
        let i = self.radii.partition_point(|v| *v <= r).clamp(1, n - 1) - 1;
        let tr = ((r - self.radii[i]) / (self.radii[i + 1] - self.radii[i])).clamp(0.0, 1.0);
        let u = (theta / (2.0 * std::f64::consts::PI)).rem_euclid(1.0) * self.n_theta as f64;
        let j0 = (u.floor() as usize).min(self.n_theta - 1);
        let j1 = (j0 + 1) % self.n_theta;
        let tt = u - j0 as f64;
        let v = |a: usize, b: usize| self.values[a * self.n_theta + b];
        let lo = v(i, j0).lin(1.0 - tt, &v(i, j1), tt);
        let hi = v(i + 1, j0).lin(1.0 - tt, &v(i + 1, j1), tt);
        lo.lin(1.0 - tr, &hi, tr)
    }
}

impl HiggsPairOnPlane {
    /// Samples on a uniform `(r, θ)` grid and writes the JSON document.
    pub fn to_json(&self, r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> Result<String> {
        if n_r < 2 || n_theta < 4 || !(r_min < r_max) {
            return Err(Error::InvalidParameter("invalid sampling grid".into()));
        }
        let mut data = Vec::with_capacity(n_r * n_theta * 12);
        for i in 0..n_r {
            let r = r_min + (r_max - r_min) * i as f64 / (n_r - 1) as f64;
            for j in 0..n_theta {
                let s = self.sample(r, 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64)?;
                for m in [s.b_r, s.b_theta, s.psi_w] {
                    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        data.push([m[(a, b)].re, m[(a, b)].im]);
                    }
                }
            }
        }
        let doc = SampledHiggsJson {
            schema: crate::gauge::CONNECTION_SCHEMA.into(),
            reduced: true,
            torus: self.torus,
            r_min,
            r_max,
            n_r,
            n_theta,
            components: vec!["b_r".into(), "b_theta".into(), "psi_w".into()],
            data,
        };
        Ok(serde_json::to_string(&doc).expect("serializable"))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: SampledHiggsJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if d.schema != crate::gauge::CONNECTION_SCHEMA || !d.reduced {
            return Err(Error::Parse("expected a reduced connection document".into()));
        }
        if d.data.len() != d.n_r * d.n_theta * 12 || d.n_r < 2 || d.n_theta < 4 {
            return Err(Error::Parse("data length does not match the grid".into()));
        }
        d.torus.validate()?;
        let m = |c: &[[f64; 2]]| Mat2::new(C64::new(c[0][0], c[0][1]), C64::new(c[1][0], c[1][1]), C64::new(c[2][0], c[2][1]), C64::new(c[3][0], c[3][1]));
        let values = d.data.chunks(12).map(|c| HiggsSample { b_r: m(&c[0..4]), b_theta: m(&c[4..8]), psi_w: m(&c[8..12]) }).collect();
        let radii = (0..d.n_r).map(|i| d.r_min + (d.r_max - d.r_min) * i as f64 / (d.n_r - 1) as f64).collect();
        Ok(HiggsPairOnPlane::new(Arc::new(SampledHiggs { radii, n_theta: d.n_theta, values }), d.torus))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{asd_residual, FnConnection};
    use crate::su2::{c, diag_i, random_unit_su2, sigma1};
    use rand::{Rng, SeedableRng};

    fn generic_pair(seed: u64) -> HiggsPairOnPlane {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let t1 = random_unit_su2(&mut rng);
        let t2 = random_unit_su2(&mut rng);
        let p1 = random_unit_su2(&mut rng) + random_unit_su2(&mut rng) * I;
        let p2 = random_unit_su2(&mut rng) * C64::new(rng.gen(), rng.gen());
        let f = move |r: f64, th: f64| HiggsSample {
            b_r: t1 * c(0.3 * th.sin() / r, 0.0),
            b_theta: t2 * c(0.5 + 0.1 * r.ln() * th.cos(), 0.0),
            psi_w: p1 * c(0.2 + 0.3 / r, 0.1 * th.cos()) + p2 * C64::from_polar(1.0 / r, -th),
        };
        HiggsPairOnPlane::new(Arc::new(FnHiggs { r_min: 1.0, f: Arc::new(f) }), TorusSpec::default())
    }

    #[test]
    fn reduction_constants_hold_on_generic_pairs() {
        for seed in 0..10 {
            let pair = generic_pair(seed);
            let conn = lift(&pair);
            for (r, th) in [(2.0, 0.3), (5.0, 2.0), (11.0, 4.0)] {
                let (h1, h2) = hitchin_residual(&pair, r, th).unwrap();
                let f = asd_residual(conn.as_ref(), &Point::new(r, th, 0.4, 1.1)).unwrap();
                let (c1, c2) = REDUCTION_CONSTANTS;
                let lhs = f * f;
                let rhs = c1 * h1 * h1 + c2 * h2 * h2;
                assert!((lhs - rhs).abs() < 1e-8 * lhs.max(1e-12), "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn reduce_after_lift_is_identity() {
        let pair = generic_pair(4);
        let conn = lift(&pair);
        let back = reduce(&conn, 1e-12).unwrap();
        let a = pair.sample(3.0, 1.0).unwrap();
        let b = back.sample(3.0, 1.0).unwrap();
        assert_eq!(a, b);
        // and through the generic path, not the stored pair
        let plain = FnConnection::new(TorusSpec::default(), RadialDomain::from(1.0), {
            let conn = conn.clone();
            move |p| conn.eval(p)
        });
        let arc: Connection = Arc::new(plain);
        let back = reduce(&arc, 1e-12).unwrap();
        let b = back.sample(3.0, 1.0).unwrap();
        assert!(frob(&(a.psi_w - b.psi_w)) < 1e-15);
    }

    #[test]
    fn torus_dependent_connection_is_rejected() {
        let conn: Connection = Arc::new(FnConnection::new(TorusSpec::default(), RadialDomain::from(1.0), |p| {
            [Mat2::zeros(), Mat2::zeros(), diag_i(0.01 * p.x.sin()), Mat2::zeros()]
        }));
        match reduce(&conn, 1e-6) {
            Err(Error::NotTorusInvariant { max_deviation, .. }) => assert!(max_deviation > 1e-3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pole_is_an_error() {
        let pair = HiggsPairOnPlane::new(
            Arc::new(FnHiggs { r_min: 0.0, f: Arc::new(|_, _| HiggsSample { b_r: Mat2::zeros(), b_theta: Mat2::zeros(), psi_w: sigma1() }) }),
            TorusSpec::default(),
        );
        assert_eq!(hitchin_residual(&pair, 0.0, 0.0), Err(Error::AtPole));
    }

    #[test]
    fn json_roundtrip_of_reduced_pair() {
        let pair = generic_pair(2);
        let s = pair.to_json(2.0, 4.0, 5, 8).unwrap();
        let back = HiggsPairOnPlane::from_json(&s).unwrap();
        let a = pair.sample(2.5, 2.0 * std::f64::consts::PI * 3.0 / 8.0).unwrap();
        let b = back.sample(2.5, 2.0 * std::f64::consts::PI * 3.0 / 8.0).unwrap();
        assert!(frob(&(a.psi_w - b.psi_w)) < 1e-14);
    }
}
