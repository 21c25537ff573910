//! Connections, curvature, the self-dual projection and holonomy.
//!
//! A connection is given by its components `(A_r, A_θ, A_x, A_y)` in the
//! coframe `dr, dθ, dx, dy`, each in su(2). Curvature components are
//! `F_{μν} = ∂_μA_ν − ∂_νA_μ + [A_μ, A_ν]`.
//!
//! In the oriented orthonormal frame `(e₁, e₂, e₃, e₄) = (∂_x, ∂_y, ∂_r, r⁻¹∂_θ)`
//! the self-dual part is spanned by
//! `C₁ = F₁₂ + F₃₄`, `C₂ = F₁₃ − F₂₄`, `C₃ = F₁₄ + F₂₃`, and
//! `|F⁺|² = ½(|C₁|² + |C₂|² + |C₃|²)`.

mod holonomy;
mod sampled;
mod weitzenbock;
mod wrappers;

pub use holonomy::{holonomy, monodromy_drift_defect, path_transport, CircleFamily, CircleKind, DriftReport};
pub use sampled::{SampledConnection, SampledHeader, CONNECTION_SCHEMA};
pub use weitzenbock::{weitzenbock_defect, weitzenbock_terms, FourierField, FourierMode, WeitzenbockTerms};
pub use wrappers::{ConstantGauge, Flat, FnConnection, Scaled};

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use crate::geometry::Point;
use crate::error::{Error, Result};
use crate::geometry::TorusSpec;
use crate::hitchin::HiggsPairOnPlane;
use crate::numerics::richardson_derivative;
use crate::su2::{comm, frob, frob_sqr, su2_defect, Mat2};

/// Components `(A_r, A_θ, A_x, A_y)`.
pub type OneForm = [Mat2; 4];

/// Radial extent of a connection's domain; torus directions are periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialDomain {
    pub r_min: f64,
    pub r_max: f64,
}

impl RadialDomain {
    pub fn from(r_min: f64) -> Self {
        RadialDomain { r_min, r_max: f64::INFINITY }
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }

    pub fn check(&self, r: f64) -> Result<()> {
        if self.contains(r) && r.is_finite() {
            Ok(())
        } else {
            Err(Error::OutsideDomain { r, r_min: self.r_min, r_max: self.r_max })
        }
    }
}

/// An SU(2) connection on `T × (annulus)`.
///
/// Evaluation must be a pure function of the point.
pub trait ConnectionSource: Send + Sync + Debug {
    fn torus(&self) -> TorusSpec;

    fn domain(&self) -> RadialDomain;

    /// Components at `p`; callers check the domain.
    fn eval(&self, p: &Point) -> OneForm;

    /// Exact partial derivatives: `jac[k][μ] = ∂_k A_μ` with `k` in `(r, θ, x, y)`.
    fn jacobian(&self, _p: &Point) -> Option<[OneForm; 4]> {
        None
    }

    /// Finite-difference steps per coordinate at `p`.
    fn fd_steps(&self, p: &Point) -> [f64; 4] {
        let t = self.torus();
        [1e-2 * p.r.max(1.0), 1e-2, 1e-2 * t.period_x, 1e-2 * t.period_y]
    }

    /// The Higgs pair this connection was lifted from, if any.
    fn higgs_pair(&self) -> Option<HiggsPairOnPlane> {
        None
    }
}

pub type Connection = Arc<dyn ConnectionSource>;

/// Components at `p` after a domain check.
pub fn potential(conn: &dyn ConnectionSource, p: &Point) -> Result<OneForm> {
    conn.domain().check(p.r)?;
    Ok(conn.eval(p))
}

/// How derivatives of the potential are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Differentiation {
    /// Exact derivatives when the source has them, finite differences otherwise.
    Auto,
    /// Fourth-order central differences with one Richardson step, using
    /// the source's default steps scaled by the factor.
    FiniteDifference { step_scale: f64 },
}

fn fd_jacobian(conn: &dyn ConnectionSource, p: &Point, steps: [f64; 4]) -> Result<[OneForm; 4]> {
    for (k, h) in steps.iter().enumerate() {
        if !(h.is_finite() && *h > 0.0) || (k == 0 && p.r - 2.0 * h <= 0.0) {
            return Err(Error::DegenerateStep(*h));
        }
    }
    let base = p.as_array();
    let mut jac = [[Mat2::zeros(); 4]; 4];
    for (k, jk) in jac.iter_mut().enumerate() {
        *jk = richardson_derivative(
            |s| {
                let mut q = base;
                q[k] = s;
                conn.eval(&Point::from_array(q))
            },
            base[k],
            steps[k],
        );
    }
    Ok(jac)
}

/// `∂_k A_μ` at `p`.
pub fn jacobian(conn: &dyn ConnectionSource, p: &Point, mode: Differentiation) -> Result<[OneForm; 4]> {
    conn.domain().check(p.r)?;
    match mode {
        Differentiation::Auto => match conn.jacobian(p) {
            Some(j) => Ok(j),
            None => fd_jacobian(conn, p, conn.fd_steps(p)),
        },
        Differentiation::FiniteDifference { step_scale } => {
            let s = conn.fd_steps(p);
            fd_jacobian(conn, p, [s[0] * step_scale, s[1] * step_scale, s[2] * step_scale, s[3] * step_scale])
        }
    }
}

/// Curvature at a point, coordinate components in the order
/// `F_{rθ}, F_{rx}, F_{ry}, F_{θx}, F_{θy}, F_{xy}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub point: Point,
    pub f: [Mat2; 6],
}

pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Which curvature components enter a norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CurvaturePart {
    #[default]
    Full,
    /// `F_xy` and `F_{ρφ}`: the torus-torus and plane-plane components.
    Contracted,
    /// The four mixed torus-plane components.
    Mixed,
}

impl CurvatureSample {
    pub fn from_potential(point: Point, a: &OneForm, jac: &[OneForm; 4]) -> Self {
        let mut f = [Mat2::zeros(); 6];
        for (n, (m, k)) in PAIRS.iter().enumerate() {
            f[n] = jac[*m][*k] - jac[*k][*m] + comm(&a[*m], &a[*k]);
        }
        CurvatureSample { point, f }
    }

    /// Coordinate component `F_{μν}` for any ordered pair.
    pub fn component(&self, m: usize, k: usize) -> Mat2 {
        if m == k {
            return Mat2::zeros();
        }
        let (a, b, s) = if m < k { (m, k, 1.0) } else { (k, m, -1.0) };
        let idx = PAIRS.iter().position(|&(x, y)| x == a && y == b).unwrap();
        self.f[idx] * num_complex::Complex64::new(s, 0.0)
    }

    /// Orthonormal components `F_{ij}` in the frame `(∂_x, ∂_y, ∂_r, r⁻¹∂_θ)`,
    /// indices `0..4` in that order.
    pub fn orthonormal(&self) -> [[Mat2; 4]; 4] {
        let r = self.point.r;
        // frame index -> (coordinate index, scale)
        let map = [(2usize, 1.0), (3usize, 1.0), (0usize, 1.0), (1usize, 1.0 / r)];
        let mut out = [[Mat2::zeros(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let (ci, si) = map[i];
                let (cj, sj) = map[j];
                out[i][j] = self.component(ci, cj) * num_complex::Complex64::new(si * sj, 0.0);
            }
        }
        out
    }

    /// The three self-dual combinations `(C₁, C₂, C₃)`.
    pub fn self_dual_combinations(&self) -> [Mat2; 3] {
        let o = self.orthonormal();
        [o[0][1] + o[2][3], o[0][2] - o[1][3], o[0][3] + o[1][2]]
    }

    /// The three anti-self-dual combinations.
    pub fn anti_self_dual_combinations(&self) -> [Mat2; 3] {
        let o = self.orthonormal();
        [o[0][1] - o[2][3], o[0][2] + o[1][3], o[0][3] - o[1][2]]
    }

    /// `|F|² = Σ_{i<j} |F_ij|²` over the selected components.
    pub fn norm_sqr_part(&self, part: CurvaturePart) -> f64 {
        let o = self.orthonormal();
        let mut s = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let contracted = (i, j) == (0, 1) || (i, j) == (2, 3);
                let take = match part {
                    CurvaturePart::Full => true,
                    CurvaturePart::Contracted => contracted,
                    CurvaturePart::Mixed => !contracted,
                };
                if take {
                    s += frob_sqr(&o[i][j]);
                }
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr_part(CurvaturePart::Full).sqrt()
    }

    /// `|F⁺|`.
    pub fn self_dual_norm(&self) -> f64 {
        let c = self.self_dual_combinations();
        (0.5 * c.iter().map(frob_sqr).sum::<f64>()).sqrt()
    }

    /// `|F⁻|`.
    pub fn anti_self_dual_norm(&self) -> f64 {
        let c = self.anti_self_dual_combinations();
        (0.5 * c.iter().map(frob_sqr).sum::<f64>()).sqrt()
    }

    /// Largest violation of anti-hermiticity / tracelessness over components.
    pub fn su2_defect(&self) -> f64 {
        self.f.iter().map(su2_defect).fold(0.0, f64::max)
    }

    pub fn max_component(&self) -> f64 {
        self.f.iter().map(frob).fold(0.0, f64::max)
    }
}

pub fn curvature(conn: &dyn ConnectionSource, p: &Point) -> Result<CurvatureSample> {
    curvature_with(conn, p, Differentiation::Auto)
}

pub fn curvature_with(conn: &dyn ConnectionSource, p: &Point, mode: Differentiation) -> Result<CurvatureSample> {
    let a = potential(conn, p)?;
    let jac = jacobian(conn, p, mode)?;
    Ok(CurvatureSample::from_potential(*p, &a, &jac))
}

/// `|F⁺|` at `p`; zero exactly when the connection is anti-self-dual there.
pub fn asd_residual(conn: &dyn ConnectionSource, p: &Point) -> Result<f64> {
    Ok(curvature(conn, p)?.self_dual_norm())
}

pub fn asd_residual_with(conn: &dyn ConnectionSource, p: &Point, mode: Differentiation) -> Result<f64> {
    Ok(curvature_with(conn, p, mode)?.self_dual_norm())
}

/// Largest coordinate component of the cyclic sum `d_A F` at `p`, with the
/// outer derivative taken by Richardson-extrapolated differences of the
/// curvature.
pub fn bianchi_residual(conn: &dyn ConnectionSource, p: &Point) -> Result<f64> {
    let a = potential(conn, p)?;
    let f0 = curvature(conn, p)?;
    let steps = conn.fd_steps(p);
    let base = p.as_array();
    let mut df: Vec<[Mat2; 6]> = Vec::with_capacity(4);
    for (k, h) in steps.iter().enumerate() {
        let mut err = None;
        let d = richardson_derivative(
            |s| {
                let mut q = base;
                q[k] = s;
                match curvature(conn, &Point::from_array(q)) {
                    Ok(c) => c.f,
                    Err(e) => {
                        err = Some(e);
                        [Mat2::zeros(); 6]
                    }
                }
            },
            base[k],
            *h,
        );
        if let Some(e) = err {
            return Err(e);
        }
        df.push(d);
    }
    let comp = |d: &[Mat2; 6], m: usize, k: usize| -> Mat2 {
        CurvatureSample { point: *p, f: *d }.component(m, k)
    };
    let mut worst: f64 = 0.0;
    for (l, m, n) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        let cov = |x: usize, y: usize, z: usize| comp(&df[x], y, z) + comm(&a[x], &f0.component(y, z));
        let s = cov(l, m, n) + cov(m, n, l) + cov(n, l, m);
        worst = worst.max(frob(&s));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{c, diag_i};

    #[test]
    fn flat_has_zero_curvature() {
        let f = Flat::new(TorusSpec::default());
        let s = curvature(&f, &Point::new(2.0, 0.3, 0.1, 0.2)).unwrap();
        assert_eq!(s.norm(), 0.0);
        assert_eq!(asd_residual(&f, &Point::new(2.0, 0.3, 0.1, 0.2)).unwrap(), 0.0);
    }

    #[test]
    fn orientation_pairs_are_dual() {
        // F = e1^e2 + e3^e4 is self-dual; F = e1^e2 - e3^e4 is anti-self-dual.
        let p = Point::new(2.0, 0.0, 0.0, 0.0);
        let x = diag_i(1.0);
        let mut f = [Mat2::zeros(); 6];
        f[5] = x; // F_xy
        f[0] = x * c(2.0, 0.0); // F_rθ = r F_ρφ
        let s = CurvatureSample { point: p, f };
        assert!(s.anti_self_dual_norm() < 1e-15);
        f[0] = -x * c(2.0, 0.0);
        let s = CurvatureSample { point: p, f };
        assert!(s.self_dual_norm() < 1e-15);
        assert!((s.anti_self_dual_norm() - s.norm()).abs() < 1e-14);
    }

    #[test]
    fn norm_splits_into_dual_parts() {
        let p = Point::new(1.7, 0.0, 0.0, 0.0);
        let f: [Mat2; 6] = std::array::from_fn(|k| diag_i(0.3 + k as f64) + crate::su2::sigma2() * c(0.0, 0.1 * k as f64));
        let s = CurvatureSample { point: p, f };
        let lhs = s.norm().powi(2);
        let rhs = s.self_dual_norm().powi(2) + s.anti_self_dual_norm().powi(2);
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
        let parts = s.norm_sqr_part(CurvaturePart::Contracted) + s.norm_sqr_part(CurvaturePart::Mixed);
        assert!((parts - lhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn outside_domain_is_an_error() {
        let f = Flat::with_domain(TorusSpec::default(), RadialDomain { r_min: 1.0, r_max: 2.0 });
        assert!(matches!(curvature(&f, &Point::new(0.5, 0.0, 0.0, 0.0)), Err(Error::OutsideDomain { .. })));
        assert!(matches!(
            curvature_with(&f, &Point::new(1.5, 0.0, 0.0, 0.0), Differentiation::FiniteDifference { step_scale: 0.0 }),
            Err(Error::DegenerateStep(_))
        ));
    }
}
