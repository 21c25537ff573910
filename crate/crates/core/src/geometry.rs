//! Torus, dual torus, twist lattice, annulus grids and loops.
//!
//! The twisted Dolbeault operator on `T` is `∂̄ + ζ dz̄` with
//! `∂̄ = ½(∂_x + i∂_y) dz̄`; on the Fourier mode `e^{i(k_n x + k_m y)}`,
//! `k_n = 2πn/L_x`, `k_m = 2πm/L_y`, it acts as `½(i k_n − k_m) + ζ`.
//! Its kernel is nontrivial exactly on the lattice generated by `π/L_y` and
//! `iπ/L_x`.
//!
//! A diagonal flat connection `i·diag(a, −a)`, `a = λ₁dx + λ₂dy`, has twist
//! `ζ = i(λ₁ + iλ₂)/2` and dual-torus coordinates `ξ_j = λ_j L_j / 2π mod 1`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSpec {
    pub period_x: f64,
    pub period_y: f64,
}

impl Default for TorusSpec {
    fn default() -> Self {
        TorusSpec { period_x: 2.0 * PI, period_y: 2.0 * PI }
    }
}

impl TorusSpec {
    pub fn new(period_x: f64, period_y: f64) -> Result<Self> {
        let t = TorusSpec { period_x, period_y };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period_x > 0.0 && self.period_y > 0.0) || !self.period_x.is_finite() || !self.period_y.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "torus periods must be positive, got ({}, {})",
                self.period_x, self.period_y
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.period_x * self.period_y
    }

    pub fn period(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.period_x
        } else {
            self.period_y
        }
    }
}

/// Generators of the twist lattice: `[π/L_y, iπ/L_x]`.
pub fn dual_lattice(torus: &TorusSpec) -> [C64; 2] {
    [C64::new(PI / torus.period_y, 0.0), C64::new(0.0, PI / torus.period_x)]
}

/// Covering radius of the (rectangular) twist lattice.
pub fn covering_radius(torus: &TorusSpec) -> f64 {
    let [g1, g2] = dual_lattice(torus);
    0.5 * (g1.norm_sqr() + g2.norm_sqr()).sqrt()
}

/// Lattice point nearest to `z`.
pub fn nearest_lattice_point(z: C64, torus: &TorusSpec) -> C64 {
    let [g1, g2] = dual_lattice(torus);
    let a = (z.re / g1.re).round();
    let b = (z.im / g2.im).round();
    C64::new(a * g1.re, b * g2.im)
}

/// Representative of `z` modulo the lattice with minimal modulus.
pub fn lattice_reduce(z: C64, torus: &TorusSpec) -> C64 {
    z - nearest_lattice_point(z, torus)
}

pub fn lattice_distance(z: C64, torus: &TorusSpec) -> f64 {
    lattice_reduce(z, torus).norm()
}

fn reduce_component(v: f64) -> f64 {
    let r = v.rem_euclid(1.0) + 0.0;
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point of the dual torus with its twist parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualTorusPoint {
    pub xi: [f64; 2],
    #[serde(with = "crate::serde_complex")]
    pub zeta: C64,
}

/// Twist parameter of the (unreduced) dual-torus coordinates `xi`.
pub fn xi_to_zeta(xi: [f64; 2], torus: &TorusSpec) -> C64 {
    let l1 = 2.0 * PI * xi[0] / torus.period_x;
    let l2 = 2.0 * PI * xi[1] / torus.period_y;
    C64::new(-l2, l1) * 0.5
}

/// Inverse of [`xi_to_zeta`] (no reduction).
pub fn zeta_to_xi(zeta: C64, torus: &TorusSpec) -> [f64; 2] {
    let l1 = 2.0 * zeta.im;
    let l2 = -2.0 * zeta.re;
    [l1 * torus.period_x / (2.0 * PI), l2 * torus.period_y / (2.0 * PI)]
}

/// Flat-connection coefficients `(λ₁, λ₂)` to unreduced dual-torus coordinates.
pub fn lambda_to_xi(lambda: [f64; 2], torus: &TorusSpec) -> [f64; 2] {
    [lambda[0] * torus.period_x / (2.0 * PI), lambda[1] * torus.period_y / (2.0 * PI)]
}

pub fn xi_to_lambda(xi: [f64; 2], torus: &TorusSpec) -> [f64; 2] {
    [2.0 * PI * xi[0] / torus.period_x, 2.0 * PI * xi[1] / torus.period_y]
}

pub fn reduce_dual(xi_raw: [f64; 2], torus: &TorusSpec) -> DualTorusPoint {
    let xi = [reduce_component(xi_raw[0]), reduce_component(xi_raw[1])];
    DualTorusPoint { xi, zeta: xi_to_zeta(xi, torus) }
}

impl DualTorusPoint {
    pub fn from_zeta(zeta: C64, torus: &TorusSpec) -> Self {
        reduce_dual(zeta_to_xi(zeta, torus), torus)
    }

    pub fn neg(&self, torus: &TorusSpec) -> Self {
        reduce_dual([-self.xi[0], -self.xi[1]], torus)
    }

    /// Distance on `ℝ²/ℤ²` in the sup norm of the periodic coordinates.
    pub fn torus_distance(&self, other: &DualTorusPoint) -> f64 {
        let d = |a: f64, b: f64| {
            let t = (a - b).rem_euclid(1.0);
            t.min(1.0 - t)
        };
        d(self.xi[0], other.xi[0]).max(d(self.xi[1], other.xi[1]))
    }

    /// `ξ = −ξ` in the dual torus.
    pub fn is_order_two(&self, tol: f64) -> bool {
        let d = |a: f64| {
            let t = (2.0 * a).rem_euclid(1.0);
            t.min(1.0 - t)
        };
        d(self.xi[0]) <= tol && d(self.xi[1]) <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialSpacing {
    Uniform,
    LogRadial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub spacing: RadialSpacing,
}

impl AnnulusGrid {
    pub fn new(r_min: f64, r_max: f64, n_r: usize, n_theta: usize, n_x: usize, n_y: usize, spacing: RadialSpacing) -> Result<Self> {
        let g = AnnulusGrid { r_min, r_max, n_r, n_theta, n_x, n_y, spacing };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("need 0 < r_min < r_max, got [{}, {}]", self.r_min, self.r_max)));
        }
        if self.n_r < 4 || self.n_theta < 4 || self.n_x < 4 || self.n_y < 4 {
            return Err(Error::InvalidParameter("all grid counts must be at least 4".into()));
        }
        Ok(())
    }

    pub fn radii(&self) -> Vec<f64> {
        let n = self.n_r;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    RadialSpacing::Uniform => self.r_min + t * (self.r_max - self.r_min),
                    RadialSpacing::LogRadial => self.r_min * (self.r_max / self.r_min).powf(t),
                }
            })
            .collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta).map(|i| 2.0 * PI * i as f64 / self.n_theta as f64).collect()
    }

    pub fn xs(&self, torus: &TorusSpec) -> Vec<f64> {
        (0..self.n_x).map(|i| torus.period_x * i as f64 / self.n_x as f64).collect()
    }

    pub fn ys(&self, torus: &TorusSpec) -> Vec<f64> {
        (0..self.n_y).map(|i| torus.period_y * i as f64 / self.n_y as f64).collect()
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta * self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index with `r` slowest and `y` fastest.
    pub fn index(&self, ir: usize, it: usize, ix: usize, iy: usize) -> usize {
        ((ir * self.n_theta + it) * self.n_x + ix) * self.n_y + iy
    }

    pub fn unindex(&self, i: usize) -> (usize, usize, usize, usize) {
        let iy = i % self.n_y;
        let ix = (i / self.n_y) % self.n_x;
        let it = (i / (self.n_y * self.n_x)) % self.n_theta;
        let ir = i / (self.n_y * self.n_x * self.n_theta);
        (ir, it, ix, iy)
    }

    /// Smallest coordinate spacing (θ measured as arc length at `r_min`).
    pub fn min_spacing(&self, torus: &TorusSpec) -> f64 {
        let radii = self.radii();
        let dr = radii.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let dth = self.r_min * 2.0 * PI / self.n_theta as f64;
        let dx = torus.period_x / self.n_x as f64;
        let dy = torus.period_y / self.n_y as f64;
        dr.min(dth).min(dx).min(dy)
    }
}

/// A point `(r, θ, x, y)` of `T × ℂ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub r: f64,
    pub theta: f64,
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(r: f64, theta: f64, x: f64, y: f64) -> Self {
        Point { r, theta, x, y }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r, self.theta, self.x, self.y]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Point { r: a[0], theta: a[1], x: a[2], y: a[3] }
    }

    pub fn w(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    XCircle,
    YCircle,
    ThetaCircle,
    /// Closed polyline through the listed `(r, θ, x, y)` vertices.
    Polyline(Vec<[f64; 4]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub kind: LoopKind,
    pub base: Point,
    pub samples: usize,
    pub reversed: bool,
}

impl Loop {
    pub fn new(kind: LoopKind, base: Point, samples: usize) -> Result<Self> {
        if samples < 16 {
            return Err(Error::InvalidParameter(format!("loop needs at least 16 samples, got {samples}")));
        }
        if let LoopKind::Polyline(v) = &kind {
            if v.len() < 2 {
                return Err(Error::InvalidParameter("polyline needs at least two vertices".into()));
            }
        }
        Ok(Loop { kind, base, samples, reversed: false })
    }

    pub fn x_circle(base: Point, samples: usize) -> Result<Self> {
        Self::new(LoopKind::XCircle, base, samples)
    }

    pub fn y_circle(base: Point, samples: usize) -> Result<Self> {
        Self::new(LoopKind::YCircle, base, samples)
    }

    pub fn theta_circle(base: Point, samples: usize) -> Result<Self> {
        Self::new(LoopKind::ThetaCircle, base, samples)
    }

    pub fn reversed(&self) -> Self {
        let mut l = self.clone();
        l.reversed = !l.reversed;
        l
    }

    /// Position and coordinate velocity at parameter `t ∈ [0, 1]`.
    pub fn sample(&self, t: f64, torus: &TorusSpec) -> (Point, [f64; 4]) {
        let (t, sign) = if self.reversed { (1.0 - t, -1.0) } else { (t, 1.0) };
        let b = self.base;
        match &self.kind {
            LoopKind::XCircle => (
                Point::new(b.r, b.theta, b.x + t * torus.period_x, b.y),
                [0.0, 0.0, sign * torus.period_x, 0.0],
            ),
            LoopKind::YCircle => (
                Point::new(b.r, b.theta, b.x, b.y + t * torus.period_y),
                [0.0, 0.0, 0.0, sign * torus.period_y],
            ),
            LoopKind::ThetaCircle => (
                Point::new(b.r, b.theta + 2.0 * PI * t, b.x, b.y),
                [0.0, sign * 2.0 * PI, 0.0, 0.0],
            ),
            LoopKind::Polyline(v) => {
                let n = v.len();
                let seg_len = |i: usize| -> f64 {
                    let a = v[i];
                    let c = v[(i + 1) % n];
                    (0..4).map(|k| (c[k] - a[k]).powi(2)).sum::<f64>().sqrt()
                };
                let total: f64 = (0..n).map(seg_len).sum();
                let mut target = t * total;
                for i in 0..n {
                    let l = seg_len(i);
                    if target <= l || i == n - 1 {
                        let a = v[i];
                        let c = v[(i + 1) % n];
                        let s = if l > 0.0 { (target / l).clamp(0.0, 1.0) } else { 0.0 };
                        let mut p = [0.0; 4];
                        let mut vel = [0.0; 4];
                        for k in 0..4 {
                            p[k] = a[k] + s * (c[k] - a[k]);
                            vel[k] = if l > 0.0 { sign * (c[k] - a[k]) * total / l } else { 0.0 };
                        }
                        return (Point::from_array(p), vel);
                    }
                    target -= l;
                }
                unreachable!()
            }
        }
    }

    /// Radii visited by the loop (for domain checks).
    pub fn radial_range(&self) -> (f64, f64) {
        match &self.kind {
            LoopKind::Polyline(v) => v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0]))),
            _ => (self.base.r, self.base.r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_examples() {
        let t = TorusSpec::default();
        assert_eq!(reduce_dual([1.25, -0.5], &t).xi, [0.25, 0.5]);
        let z = reduce_dual([0.0, 0.0], &t);
        assert_eq!(z.xi, [0.0, 0.0]);
        assert_eq!(z.zeta, C64::new(0.0, 0.0));
        assert_eq!(reduce_dual([0.999999, 0.0], &t).xi, [0.999999, 0.0]);
        assert_eq!(reduce_dual([-1e-18, 0.0], &t).xi[0], 0.0);
        assert_eq!(reduce_dual([-0.0, 0.0], &t).xi[0].to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn lattice_examples() {
        let l = dual_lattice(&TorusSpec::default());
        assert!((l[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((l[1] - C64::new(0.0, 0.5)).norm() < 1e-15);
        let l = dual_lattice(&TorusSpec::new(2.0 * PI, 4.0 * PI).unwrap());
        assert!((l[0] - C64::new(0.25, 0.0)).norm() < 1e-15);
        assert!((l[1] - C64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn zeta_xi_roundtrip_and_integer_points() {
        let t = TorusSpec::new(3.0, 5.0).unwrap();
        let xi = [0.3, 0.7];
        let z = xi_to_zeta(xi, &t);
        let back = zeta_to_xi(z, &t);
        assert!((back[0] - xi[0]).abs() < 1e-14 && (back[1] - xi[1]).abs() < 1e-14);
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (2.0, -3.0)] {
            assert!(lattice_distance(xi_to_zeta([a, b], &t), &t) < 1e-14);
        }
    }

    #[test]
    fn order_two_detection() {
        let t = TorusSpec::default();
        assert!(reduce_dual([0.5, 0.5], &t).is_order_two(1e-12));
        assert!(reduce_dual([0.0, 0.5], &t).is_order_two(1e-12));
        assert!(!reduce_dual([0.25, 0.0], &t).is_order_two(1e-12));
    }

    #[test]
    fn grid_indexing_roundtrip() {
        let g = AnnulusGrid::new(1.0, 2.0, 5, 6, 4, 7, RadialSpacing::LogRadial).unwrap();
        for i in 0..g.len() {
            let (a, b, c, d) = g.unindex(i);
            assert_eq!(g.index(a, b, c, d), i);
        }
        let r = g.radii();
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        assert!((r[4] - 2.0).abs() < 1e-15);
        assert!(AnnulusGrid::new(2.0, 1.0, 5, 6, 4, 7, RadialSpacing::Uniform).is_err());
        assert!(AnnulusGrid::new(1.0, 2.0, 3, 6, 4, 7, RadialSpacing::Uniform).is_err());
    }

    #[test]
    fn loops_are_closed() {
        let t = TorusSpec::default();
        let base = Point::new(3.0, 0.2, 0.1, 0.4);
        for l in [
            Loop::x_circle(base, 16).unwrap(),
            Loop::y_circle(base, 16).unwrap(),
            Loop::theta_circle(base, 16).unwrap(),
            Loop::new(LoopKind::Polyline(vec![[3.0, 0.0, 0.0, 0.0], [4.0, 0.0, 0.0, 0.0], [4.0, 0.5, 0.0, 0.0]]), base, 32).unwrap(),
        ] {
            let (p0, _) = l.sample(0.0, &t);
            let (p1, _) = l.sample(1.0, &t);
            let d = [p1.r - p0.r, (p1.theta - p0.theta).rem_euclid(2.0 * PI), (p1.x - p0.x).rem_euclid(t.period_x), (p1.y - p0.y).rem_euclid(t.period_y)];
            for (k, v) in d.iter().enumerate() {
                let per = [f64::INFINITY, 2.0 * PI, t.period_x, t.period_y][k];
                assert!(v.abs() < 1e-12 || (per - v).abs() < 1e-12, "{d:?}");
            }
        }
        assert!(Loop::x_circle(base, 8).is_err());
    }
}
