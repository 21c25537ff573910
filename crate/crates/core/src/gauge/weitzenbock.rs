//! Integrated Weitzenböck identity for a flat diagonal connection on
//! `T × {R ≤ r ≤ R'}`.
//!
//! For a flat connection `Γ` and any su(2)-valued 1-form `a`,
//! `|d_Γ a|² + |d*_Γ a|² − |∇_Γ a|²` is the divergence of
//! `V_k = ⟨a_k, Σ_i ∇_i a_i⟩ − Σ_i ⟨a_i, ∇_i a_k⟩`. Integrating over the shell,
//! with `a_r = 0` at `r = R`, the inner flux is `∫_{r=R} |a_θ / R|² dθ dx dy`,
//! so
//!
//! `‖d*a‖² + ‖da‖² − ‖∇a‖² + ∫_{r=R} |a_θ/R|² dθ dx dy − Φ_{R'} = 0`
//!
//! where `Φ_{R'} = ∫_{r=R'} V·e_r R' dθ dx dy` is the outer flux.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::TorusSpec;
use crate::numerics::composite_gauss;
use crate::su2::{comm, diag_i, frob_sqr, inner, Mat2};

/// One term `P(r)·(e^{iφ}M − (e^{iφ}M)†)` with `φ = pθ + k_n x + k_m y`,
/// contributing to each of the components `(a_r, a_θ, a_x, a_y)` with its own
/// real polynomial profile (coefficients in increasing degree).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub p: i32,
    pub n: i32,
    pub m: i32,
    #[serde(with = "mat_serde")]
    pub matrix: Mat2,
    pub profiles: [Vec<f64>; 4],
}

mod mat_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat2, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = m.iter().map(|z| [z.re, z.im]).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Mat2, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        if v.len() != 4 {
            return Err(serde::de::Error::custom("matrix needs 4 entries"));
        }
        Ok(Mat2::from_iterator(v.into_iter().map(|[a, b]| C64::new(a, b))))
    }
}

/// A finite Fourier polynomial 1-form in `(θ, x, y)` with polynomial radial profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierField {
    pub torus: TorusSpec,
    pub modes: Vec<FourierMode>,
}

fn poly(c: &[f64], r: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for a in c.iter().rev() {
        d = d * r + v;
        v = v * r + a;
    }
    (v, d)
}

fn ah(x: Mat2) -> Mat2 {
    x - x.adjoint()
}

/// Polar components and their partial derivatives.
struct Jet {
    a: [Mat2; 4],
    /// `d[k][μ] = ∂_k a_μ`, `k` in `(r, θ, x, y)`.
    d: [[Mat2; 4]; 4],
}

impl FourierField {
    fn max_frequencies(&self) -> (i32, i32, i32) {
        self.modes.iter().fold((0, 0, 0), |(p, n, m), md| (p.max(md.p.abs()), n.max(md.n.abs()), m.max(md.m.abs())))
    }

    fn max_degree(&self) -> usize {
        self.modes.iter().flat_map(|m| m.profiles.iter().map(|p| p.len())).max().unwrap_or(0)
    }

    fn jet(&self, r: f64, th: f64, x: f64, y: f64) -> Jet {
        let kx = 2.0 * PI / self.torus.period_x;
        let ky = 2.0 * PI / self.torus.period_y;
        let mut a = [Mat2::zeros(); 4];
        let mut d = [[Mat2::zeros(); 4]; 4];
        for md in &self.modes {
            let phase = md.p as f64 * th + md.n as f64 * kx * x + md.m as f64 * ky * y;
            let e = md.matrix * C64::from_polar(1.0, phase);
            let base = ah(e);
            let freqs = [md.p as f64, md.n as f64 * kx, md.m as f64 * ky];
            let dang: [Mat2; 3] = std::array::from_fn(|j| ah(e * C64::new(0.0, freqs[j])));
            for mu in 0..4 {
                let (v, dv) = poly(&md.profiles[mu], r);
                a[mu] += base * C64::new(v, 0.0);
                d[0][mu] += base * C64::new(dv, 0.0);
                for j in 0..3 {
                    d[j + 1][mu] += dang[j] * C64::new(v, 0.0);
                }
            }
        }
        Jet { a, d }
    }
}

/// Cartesian components `(a₁, a₂, a_x, a_y)` and covariant gradient
/// `g[i][j] = ∇_i a_j` in the orthonormal frame `(∂₁, ∂₂, ∂_x, ∂_y)`.
fn cartesian_gradient(jet: &Jet, r: f64, th: f64, gamma: &[Mat2; 2]) -> ([Mat2; 4], [[Mat2; 4]; 4]) {
    let (s, c) = th.sin_cos();
    let cc = |v: f64| C64::new(v, 0.0);
    let [ar, at, ax, ay] = jet.a;
    let aphi = at * cc(1.0 / r);
    let cart = [ar * cc(c) - aphi * cc(s), ar * cc(s) + aphi * cc(c), ax, ay];
    // ∂_r and ∂_θ of the Cartesian components
    let dr_aphi = jet.d[0][1] * cc(1.0 / r) - at * cc(1.0 / (r * r));
    let dt_aphi = jet.d[1][1] * cc(1.0 / r);
    let dr = [
        jet.d[0][0] * cc(c) - dr_aphi * cc(s),
        jet.d[0][0] * cc(s) + dr_aphi * cc(c),
        jet.d[0][2],
        jet.d[0][3],
    ];
    let dt = [
        jet.d[1][0] * cc(c) - ar * cc(s) - dt_aphi * cc(s) - aphi * cc(c),
        jet.d[1][0] * cc(s) + ar * cc(c) + dt_aphi * cc(c) - aphi * cc(s),
        jet.d[1][2],
        jet.d[1][3],
    ];
    let dx = [jet.d[2][0] * cc(c) - jet.d[2][1] * cc(s / r), jet.d[2][0] * cc(s) + jet.d[2][1] * cc(c / r), jet.d[2][2], jet.d[2][3]];
    let dy = [jet.d[3][0] * cc(c) - jet.d[3][1] * cc(s / r), jet.d[3][0] * cc(s) + jet.d[3][1] * cc(c / r), jet.d[3][2], jet.d[3][3]];
    let mut g = [[Mat2::zeros(); 4]; 4];
    for j in 0..4 {
        g[0][j] = dr[j] * cc(c) - dt[j] * cc(s / r);
        g[1][j] = dr[j] * cc(s) + dt[j] * cc(c / r);
        g[2][j] = dx[j] + comm(&gamma[0], &cart[j]);
        g[3][j] = dy[j] + comm(&gamma[1], &cart[j]);
    }
    (cart, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeitzenbockTerms {
    pub codifferential: f64,
    pub differential: f64,
    pub gradient: f64,
    pub inner_boundary: f64,
    pub outer_flux: f64,
    pub defect: f64,
}

/// Evaluates every term of the identity with Gauss–Legendre quadrature in `r`
/// and the trapezoid rule (exact for these trigonometric polynomials) in `θ, x, y`.
pub fn weitzenbock_terms(a: &FourierField, lambda: [f64; 2], r_inner: f64, r_outer: f64) -> Result<WeitzenbockTerms> {
    if !(r_inner > 0.0 && r_outer > r_inner) {
        return Err(Error::InvalidParameter(format!("need 0 < R < R', got [{r_inner}, {r_outer}]")));
    }
    let gamma = [diag_i(lambda[0]), diag_i(lambda[1])];
    let (pmax, nmax, mmax) = a.max_frequencies();
    let nt = (4 * pmax as usize + 4).max(8);
    let nx = (4 * nmax as usize + 4).max(4);
    let ny = (4 * mmax as usize + 4).max(4);
    let deg = a.max_degree();
    let order = (deg + 24).min(64);
    let rq = composite_gauss(r_inner, r_outer, 4, order);
    let tw = 2.0 * PI / nt as f64;
    let xw = a.torus.period_x / nx as f64;
    let yw = a.torus.period_y / ny as f64;
    let angles: Vec<(f64, f64, f64)> = (0..nt)
        .flat_map(|i| (0..nx).flat_map(move |j| (0..ny).map(move |k| (i, j, k))))
        .map(|(i, j, k)| (i as f64 * tw, j as f64 * xw, k as f64 * yw))
        .collect();

    // boundary condition a_r(R) = 0
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for &(th, x, y) in &angles {
        let j = a.jet(r_inner, th, x, y);
        worst = worst.max(frob_sqr(&j.a[0]).sqrt());
        scale = scale.max(j.a.iter().map(|m| frob_sqr(m).sqrt()).fold(0.0, f64::max));
    }
    if worst > 1e-12 * scale.max(1.0) {
        return Err(Error::BoundaryCondition(format!("a_r at r = R has size {worst:e}")));
    }

    let (mut cod, mut dif, mut grad) = (0.0, 0.0, 0.0);
    for &(r, wr) in &rq {
        for &(th, x, y) in &angles {
            let (_, g) = cartesian_gradient(&a.jet(r, th, x, y), r, th, &gamma);
            let div = g[0][0] + g[1][1] + g[2][2] + g[3][3];
            let mut da = 0.0;
            let mut na = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    na += frob_sqr(&g[i][j]);
                    if i < j {
                        da += frob_sqr(&(g[i][j] - g[j][i]));
                    }
                }
            }
            let w = wr * r * tw * xw * yw;
            cod += w * frob_sqr(&div);
            dif += w * da;
            grad += w * na;
        }
    }

    let mut inner_b = 0.0;
    let mut outer = 0.0;
    for &(th, x, y) in &angles {
        let j = a.jet(r_inner, th, x, y);
        inner_b += frob_sqr(&(j.a[1] * C64::new(1.0 / r_inner, 0.0))) * tw * xw * yw;

        let j = a.jet(r_outer, th, x, y);
        let (cart, g) = cartesian_gradient(&j, r_outer, th, &gamma);
        let (s, c) = th.sin_cos();
        let div = g[0][0] + g[1][1] + g[2][2] + g[3][3];
        let ar = cart[0] * C64::new(c, 0.0) + cart[1] * C64::new(s, 0.0);
        let mut v = inner(&ar, &div);
        for i in 0..4 {
            let radial = g[i][0] * C64::new(c, 0.0) + g[i][1] * C64::new(s, 0.0);
            v -= inner(&cart[i], &radial);
        }
        outer += v * r_outer * tw * xw * yw;
    }
    let defect = cod + dif - grad + inner_b - outer;
    Ok(WeitzenbockTerms { codifferential: cod, differential: dif, gradient: grad, inner_boundary: inner_b, outer_flux: outer, defect })
}

/// `‖d*_Γ a‖² + ‖d_Γ a‖² − ‖∇_Γ a‖²` plus the boundary terms; zero up to quadrature error.
pub fn weitzenbock_defect(a: &FourierField, lambda: [f64; 2], r_inner: f64, r_outer: f64) -> Result<f64> {
    Ok(weitzenbock_terms(a, lambda, r_inner, r_outer)?.defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{c, sigma3};

    fn mode(p: i32, n: i32, m: i32, matrix: Mat2, profiles: [Vec<f64>; 4]) -> FourierMode {
        FourierMode { p, n, m, matrix, profiles }
    }

    #[test]
    fn zero_field() {
        let f = FourierField { torus: TorusSpec::default(), modes: vec![] };
        assert_eq!(weitzenbock_defect(&f, [0.0, 0.0], 1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_sin_x_dy() {
        // sin(x) σ₃ dy with σ₃ made anti-hermitian: (e^{ix} M − h.c.) with M = σ₃/2
        // gives i sin(x) σ₃.
        let f = FourierField {
            torus: TorusSpec::default(),
            modes: vec![mode(0, 1, 0, sigma3() * c(0.5, 0.0), [vec![], vec![], vec![], vec![1.0]])],
        };
        let t = weitzenbock_terms(&f, [0.0, 0.0], 3.0, 6.0).unwrap();
        // ‖∇a‖² = ‖da‖² = ∫ 2 cos²x · r dr dθ dx dy
        let exact = (2.0 * PI).powi(3) * (36.0 - 9.0) / 2.0;
        assert!((t.gradient - exact).abs() < 1e-9 * exact, "{} vs {}", t.gradient, exact);
        assert!(t.defect.abs() < 1e-6);
    }

    #[test]
    fn boundary_condition_is_checked() {
        let f = FourierField {
            torus: TorusSpec::default(),
            modes: vec![mode(1, 0, 0, sigma3() * c(0.5, 0.0), [vec![1.0], vec![], vec![], vec![]])],
        };
        assert!(matches!(weitzenbock_defect(&f, [0.0, 0.0], 1.0, 2.0), Err(Error::BoundaryCondition(_))));
    }

    #[test]
    fn mixed_field_with_nontrivial_gamma() {
        let m1 = crate::su2::sigma1() * c(0.3, 0.2) + sigma3() * c(0.1, 0.0);
        let m2 = crate::su2::sigma2() * c(0.0, 0.4);
        let f = FourierField {
            torus: TorusSpec::default(),
            modes: vec![
                // a_r vanishes at R = 2: profile (r - 2)(1 + r/4)
                mode(1, 1, 0, m1, [vec![-2.0, 0.5, 0.25], vec![0.2, 0.1], vec![1.0, -0.3], vec![0.0, 0.0, 0.05]]),
                mode(2, 0, -1, m2, [vec![-4.0, 2.0], vec![1.0], vec![0.0, 0.1], vec![0.7]]),
            ],
        };
        let t = weitzenbock_terms(&f, [0.3, -0.2], 2.0, 4.0).unwrap();
        assert!(t.defect.abs() < 1e-8 * t.gradient.max(1.0), "{t:?}");
        assert!(t.inner_boundary > 0.0);
    }
}
