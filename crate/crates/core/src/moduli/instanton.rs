//! Discrete `d_A`, its exact adjoint and the tangent conditions
//! `d_A* a = 0`, `d_A⁺ a = 0` on a uniform annulus grid.
//!
//! Inner products are `Σ_p w_p Σ_μ g^{μμ} Re tr(a_μ† b_μ)` with
//! `w_p = r Δr Δθ Δx Δy` (halved at the radial ends) and `g^{θθ} = r⁻²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{complex_structures, stencil};
use crate::error::{Error, Result};
use crate::gauge::{curvature, potential, ConnectionSource, CurvatureSample, OneForm, PAIRS};
use crate::geometry::{AnnulusGrid, Point, RadialSpacing, TorusSpec};
use crate::su2::{comm, frob_sqr, inner, Mat2};

/// Radial layers excluded on each side when residual norms are taken.
pub const RESIDUAL_MARGIN: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstantonGrid {
    pub grid: AnnulusGrid,
    pub torus: TorusSpec,
}

impl InstantonGrid {
    pub fn new(grid: AnnulusGrid, torus: TorusSpec) -> Result<Self> {
        grid.validate()?;
        torus.validate()?;
        if grid.spacing != RadialSpacing::Uniform {
            return Err(Error::InvalidParameter("tangent grids need uniform radial spacing".into()));
        }
        if grid.n_r < 2 * RESIDUAL_MARGIN + 1 {
            return Err(Error::InvalidParameter(format!("need at least {} radial points", 2 * RESIDUAL_MARGIN + 1)));
        }
        Ok(InstantonGrid { grid, torus })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    fn counts(&self) -> [usize; 4] {
        let g = &self.grid;
        [g.n_r, g.n_theta, g.n_x, g.n_y]
    }

    fn spacing(&self) -> [f64; 4] {
        let g = &self.grid;
        [
            (g.r_max - g.r_min) / (g.n_r - 1) as f64,
            std::f64::consts::TAU / g.n_theta as f64,
            self.torus.period_x / g.n_x as f64,
            self.torus.period_y / g.n_y as f64,
        ]
    }

    fn radius(&self, ir: usize) -> f64 {
        self.grid.r_min + ir as f64 * self.spacing()[0]
    }

    pub fn point(&self, i: usize) -> Point {
        let (ir, it, ix, iy) = self.grid.unindex(i);
        let h = self.spacing();
        Point::new(self.radius(ir), it as f64 * h[1], ix as f64 * h[2], iy as f64 * h[3])
    }

    /// Quadrature weights `r Δr Δθ Δx Δy`, trapezoid in `r`.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let cell = h.iter().product::<f64>();
        (0..self.len())
            .map(|i| {
                let (ir, ..) = self.grid.unindex(i);
                let end = if ir == 0 || ir == self.grid.n_r - 1 { 0.5 } else { 1.0 };
                end * self.radius(ir) * cell
            })
            .collect()
    }

    /// `g^{μμ}` at the radius of point `i`.
    fn inverse_metric(&self, i: usize) -> [f64; 4] {
        let (ir, ..) = self.grid.unindex(i);
        let r = self.radius(ir);
        [1.0, 1.0 / (r * r), 1.0, 1.0]
    }

    fn interior(&self, i: usize) -> bool {
        let (ir, ..) = self.grid.unindex(i);
        ir >= RESIDUAL_MARGIN && ir + RESIDUAL_MARGIN < self.grid.n_r
    }

    fn neighbor(&self, idx: [usize; 4], dim: usize, j: usize) -> usize {
        let mut q = idx;
        q[dim] = j;
        self.grid.index(q[0], q[1], q[2], q[3])
    }

    fn multi_index(&self, i: usize) -> [usize; 4] {
        let (a, b, c, d) = self.grid.unindex(i);
        [a, b, c, d]
    }

    /// `S_dim f`.
    fn derivative(&self, f: &[Mat2], dim: usize) -> Vec<Mat2> {
        let (n, h) = (self.counts()[dim], self.spacing()[dim]);
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let idx = self.multi_index(i);
                stencil(n, idx[dim], h, dim != 0)
                    .into_iter()
                    .fold(Mat2::zeros(), |acc, (j, w)| acc + f[self.neighbor(idx, dim, j)] * crate::su2::c(w, 0.0))
            })
            .collect()
    }

    /// `S_dimᵀ f`.
    fn derivative_transpose(&self, f: &[Mat2], dim: usize) -> Vec<Mat2> {
        let (n, h) = (self.counts()[dim], self.spacing()[dim]);
        let mut out = vec![Mat2::zeros(); self.len()];
        for (i, fi) in f.iter().enumerate() {
            let idx = self.multi_index(i);
            for (j, w) in stencil(n, idx[dim], h, dim != 0) {
                out[self.neighbor(idx, dim, j)] += fi * crate::su2::c(w, 0.0);
            }
        }
        out
    }

    /// The connection sampled on the grid.
    fn background(&self, conn: &dyn ConnectionSource) -> Result<Vec<OneForm>> {
        if conn.torus() != self.torus {
            return Err(Error::DomainMismatch("grid torus differs from the connection's torus".into()));
        }
        let d = conn.domain();
        if !(d.contains(self.grid.r_min) && d.contains(self.grid.r_max)) {
            return Err(Error::DomainMismatch(format!(
                "grid [{}, {}] not inside the connection domain [{}, {}]",
                self.grid.r_min, self.grid.r_max, d.r_min, d.r_max
            )));
        }
        (0..self.len()).into_par_iter().map(|i| potential(conn, &self.point(i))).collect()
    }
}

/// An su(2)-valued 1-form `(a_r, a_θ, a_x, a_y)` sampled on an annulus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVectorInstanton {
    pub domain: InstantonGrid,
    pub values: Vec<OneForm>,
}

impl TangentVectorInstanton {
    pub fn new(domain: InstantonGrid, values: Vec<OneForm>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::DomainMismatch(format!("{} values for {} grid points", values.len(), domain.len())));
        }
        Ok(TangentVectorInstanton { domain, values })
    }

    pub fn zeros(domain: InstantonGrid) -> Self {
        let values = vec![[Mat2::zeros(); 4]; domain.len()];
        TangentVectorInstanton { domain, values }
    }

    pub fn from_fn(domain: InstantonGrid, f: impl Fn(&Point) -> OneForm + Sync) -> Self {
        let values = (0..domain.len()).into_par_iter().map(|i| f(&domain.point(i))).collect();
        TangentVectorInstanton { domain, values }
    }

    fn component(&self, mu: usize) -> Vec<Mat2> {
        self.values.iter().map(|a| a[mu]).collect()
    }

    pub fn su2_defect(&self) -> f64 {
        self.values.iter().flat_map(|a| a.iter()).map(crate::su2::su2_defect).fold(0.0, f64::max)
    }
}

fn same_domain(a: &InstantonGrid, b: &InstantonGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DomainMismatch("tangent vectors live on different grids".into()))
    }
}

/// `d_A u = (D_r u, D_θ u, D_x u, D_y u)` with `D_μ u = S_μ u + [A_μ, u]`.
pub fn covariant_gradient(conn: &dyn ConnectionSource, domain: &InstantonGrid, u: &[Mat2]) -> Result<TangentVectorInstanton> {
    if u.len() != domain.len() {
        return Err(Error::DomainMismatch(format!("{} values for {} grid points", u.len(), domain.len())));
    }
    let a = domain.background(conn)?;
    let ds: Vec<Vec<Mat2>> = (0..4).map(|mu| domain.derivative(u, mu)).collect();
    let values = (0..domain.len())
        .map(|i| std::array::from_fn(|mu| ds[mu][i] + comm(&a[i][mu], &u[i])))
        .collect();
    Ok(TangentVectorInstanton { domain: domain.clone(), values })
}

/// The exact adjoint of [`covariant_gradient`] under the grid inner products.
pub fn codifferential(conn: &dyn ConnectionSource, a: &TangentVectorInstanton) -> Result<Vec<Mat2>> {
    let dom = &a.domain;
    let bg = dom.background(conn)?;
    let w = dom.weights();
    let mut out: Vec<Mat2> = (0..dom.len())
        .map(|i| {
            let g = dom.inverse_metric(i);
            (0..4).fold(Mat2::zeros(), |acc, mu| acc + comm(&a.values[i][mu], &bg[i][mu]) * crate::su2::c(g[mu], 0.0))
        })
        .collect();
    for mu in 0..4 {
        let weighted: Vec<Mat2> = (0..dom.len())
            .map(|i| a.values[i][mu] * crate::su2::c(w[i] * dom.inverse_metric(i)[mu], 0.0))
            .collect();
        for (i, t) in dom.derivative_transpose(&weighted, mu).into_iter().enumerate() {
            out[i] += t * crate::su2::c(1.0 / w[i], 0.0);
        }
    }
    Ok(out)
}

/// `d_A a` as curvature-like samples `(D_μ a_ν − D_ν a_μ)`.
fn linearized_curvature(conn: &dyn ConnectionSource, a: &TangentVectorInstanton) -> Result<Vec<CurvatureSample>> {
    let dom = &a.domain;
    let bg = dom.background(conn)?;
    let comps: Vec<Vec<Mat2>> = (0..4).map(|mu| a.component(mu)).collect();
    // deriv[m][k] = S_m a_k
    let mut deriv = vec![vec![Vec::new(); 4]; 4];
    for (m, row) in deriv.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            if m != k {
                *slot = dom.derivative(&comps[k], m);
            }
        }
    }
    Ok((0..dom.len())
        .map(|i| {
            let mut f = [Mat2::zeros(); 6];
            for (n, &(m, k)) in PAIRS.iter().enumerate() {
                let (am, ak) = (&a.values[i], &bg[i]);
                f[n] = deriv[m][k][i] - deriv[k][m][i] + comm(&ak[m], &am[k]) - comm(&ak[k], &am[m]);
            }
            CurvatureSample { point: dom.point(i), f }
        })
        .collect())
}

/// `(‖d_A* a‖, ‖d_A⁺ a‖)` over grid points at least [`RESIDUAL_MARGIN`]
/// layers from the radial edges.
pub fn instanton_tangent_residual(conn: &dyn ConnectionSource, a: &TangentVectorInstanton) -> Result<(f64, f64)> {
    let dom = &a.domain;
    let w = dom.weights();
    let star = codifferential(conn, a)?;
    let plus = linearized_curvature(conn, a)?;
    let (mut s0, mut s1) = (0.0, 0.0);
    for i in (0..dom.len()).filter(|&i| dom.interior(i)) {
        s0 += w[i] * frob_sqr(&star[i]);
        s1 += w[i] * plus[i].self_dual_norm().powi(2);
    }
    Ok((s0.sqrt(), s1.sqrt()))
}

/// Constant translation fields on `T × ℂ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Translation {
    X,
    Y,
    W1,
    W2,
}

impl Translation {
    /// Coordinate components `(X^r, X^θ, X^x, X^y)` at `p`.
    pub fn vector(&self, p: &Point) -> [f64; 4] {
        let (s, c) = p.theta.sin_cos();
        match self {
            Translation::X => [0.0, 0.0, 1.0, 0.0],
            Translation::Y => [0.0, 0.0, 0.0, 1.0],
            Translation::W1 => [c, -s / p.r, 0.0, 0.0],
            Translation::W2 => [s, c / p.r, 0.0, 0.0],
        }
    }
}

/// `a = X ⌟ F_A`, the infinitesimal translation of `A` along `X` modulo gauge.
pub fn translation_deformation(conn: &dyn ConnectionSource, domain: &InstantonGrid, dir: Translation) -> Result<TangentVectorInstanton> {
    domain.background(conn)?;
    let values: Result<Vec<OneForm>> = (0..domain.len())
        .into_par_iter()
        .map(|i| {
            let p = domain.point(i);
            let f = curvature(conn, &p)?;
            let x = dir.vector(&p);
            Ok(std::array::from_fn(|mu| {
                (0..4).fold(Mat2::zeros(), |acc, nu| acc + f.component(nu, mu) * crate::su2::c(x[nu], 0.0))
            }))
        })
        .collect();
    Ok(TangentVectorInstanton { domain: domain.clone(), values: values? })
}

/// `Σ_p w_p Re tr(u_p† v_p)`.
pub fn l2_scalar(domain: &InstantonGrid, u: &[Mat2], v: &[Mat2]) -> Result<f64> {
    if u.len() != domain.len() || v.len() != domain.len() {
        return Err(Error::DomainMismatch("scalar fields do not match the grid".into()));
    }
    let w = domain.weights();
    Ok(w.iter().zip(u.iter().zip(v)).map(|(w, (a, b))| w * inner(a, b)).sum())
}

/// `g(a₁, a₂) = Σ_p w_p Σ_μ g^{μμ} Re tr(a₁_μ† a₂_μ)`.
pub fn l2_metric_instanton(a1: &TangentVectorInstanton, a2: &TangentVectorInstanton) -> Result<f64> {
    same_domain(&a1.domain, &a2.domain)?;
    let dom = &a1.domain;
    let w = dom.weights();
    Ok((0..dom.len())
        .map(|i| {
            let g = dom.inverse_metric(i);
            w[i] * (0..4).map(|mu| g[mu] * inner(&a1.values[i][mu], &a2.values[i][mu])).sum::<f64>()
        })
        .sum())
}

/// `I_j` (`j ∈ {1, 2, 3}`) acting on the orthonormal components `(a_x, a_y, a_{w₁}, a_{w₂})`.
pub fn apply_complex_structure(j: usize, a: &TangentVectorInstanton) -> Result<TangentVectorInstanton> {
    if !(1..=3).contains(&j) {
        return Err(Error::InvalidParameter(format!("complex structure index must be 1, 2 or 3, got {j}")));
    }
    let m = complex_structures()[j - 1];
    let dom = &a.domain;
    let values = (0..dom.len())
        .map(|i| {
            let p = dom.point(i);
            let (s, c) = p.theta.sin_cos();
            let v = &a.values[i];
            let re = |x: f64| crate::su2::c(x, 0.0);
            let (ar, at) = (v[0], v[1] * re(1.0 / p.r));
            let e = [v[2], v[3], ar * re(c) - at * re(s), ar * re(s) + at * re(c)];
            let t: [Mat2; 4] = std::array::from_fn(|r| (0..4).fold(Mat2::zeros(), |acc, k| acc + e[k] * re(m[(r, k)])));
            [t[2] * re(c) + t[3] * re(s), (t[3] * re(c) - t[2] * re(s)) * re(p.r), t[0], t[1]]
        })
        .collect();
    Ok(TangentVectorInstanton { domain: dom.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{model_connection, ModelDomain, ModelParams};
    use crate::su2::{c, from_su2_coords};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn domain(r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> InstantonGrid {
        let g = AnnulusGrid::new(r_min, r_max, n_r, n_theta, 4, 4, RadialSpacing::Uniform).unwrap();
        InstantonGrid::new(g, TorusSpec::default()).unwrap()
    }

    fn semisimple() -> crate::Connection {
        let p = ModelParams::semisimple(c(0.1, 0.2), c(1.0, -0.5), 0.25).unwrap();
        model_connection(&p, &ModelDomain { torus: TorusSpec::default(), r_min: 2.0 }).unwrap()
    }

    fn nilpotent() -> crate::Connection {
        model_connection(&ModelParams::nilpotent(), &ModelDomain { torus: TorusSpec::default(), r_min: 2.0 }).unwrap()
    }

    /// Smooth su(2) field supported in `r ∈ (r0, r1)`.
    fn bump(dom: &InstantonGrid, r0: f64, r1: f64, seed: u64) -> Vec<Mat2> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coef: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        (0..dom.len())
            .map(|i| {
                let p = dom.point(i);
                let t = (p.r - r0) / (r1 - r0);
                let b = if t > 0.0 && t < 1.0 { (t * (1.0 - t)).powi(4) * 256.0 } else { 0.0 };
                let v = [coef[0] + coef[1] * p.theta.cos(), coef[2] * p.theta.sin() + coef[3] * p.x.cos(), coef[4] + coef[5] * p.y.sin()];
                from_su2_coords(v) * c(b, 0.0)
            })
            .collect()
    }

    fn random_tangent(dom: &InstantonGrid, seed: u64) -> TangentVectorInstanton {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..dom.len())
            .map(|_| std::array::from_fn(|_| from_su2_coords([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])))
            .collect();
        TangentVectorInstanton::new(dom.clone(), values).unwrap()
    }

    #[test]
    fn zero_tangent_has_zero_residuals() {
        let dom = domain(5.0, 7.0, 12, 8);
        let a = TangentVectorInstanton::zeros(dom);
        assert_eq!(instanton_tangent_residual(semisimple().as_ref(), &a).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn gauge_directions_are_self_dual_closed() {
        // d_A⁺ d_A u = [F_A⁺, u] = 0 on ASD backgrounds, up to discretization
        for conn in [semisimple(), nilpotent()] {
            let dom = domain(5.0, 9.0, 41, 64);
            let u = bump(&dom, 5.5, 8.5, 3);
            let a = covariant_gradient(conn.as_ref(), &dom, &u).unwrap();
            let (star, plus) = instanton_tangent_residual(conn.as_ref(), &a).unwrap();
            let scale = l2_metric_instanton(&a, &a).unwrap().sqrt();
            assert!(plus < 1e-3 * scale, "plus {plus} scale {scale}");
            // first residual is ‖Δ_A u‖ on the interior, which is far from zero
            assert!(star > 1e-2 * scale);
        }
    }

    #[test]
    fn translations_are_tangent() {
        let dom = domain(8.0, 12.0, 41, 64);
        for conn in [semisimple(), nilpotent()] {
            for dir in [Translation::W1, Translation::W2, Translation::X] {
                let a = translation_deformation(conn.as_ref(), &dom, dir).unwrap();
                let (star, plus) = instanton_tangent_residual(conn.as_ref(), &a).unwrap();
                assert!(star <= 1e-4 && plus <= 1e-4, "{dir:?}: {star} {plus}");
            }
        }
    }

    #[test]
    fn codifferential_is_the_exact_adjoint() {
        let dom = domain(5.0, 7.0, 12, 8);
        let conn = nilpotent();
        let a = random_tangent(&dom, 11);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let u: Vec<Mat2> = (0..dom.len()).map(|_| from_su2_coords([rng.gen(), rng.gen(), rng.gen()])).collect();
        let du = covariant_gradient(conn.as_ref(), &dom, &u).unwrap();
        let lhs = l2_metric_instanton(&a, &du).unwrap();
        let rhs = l2_scalar(&dom, &codifferential(conn.as_ref(), &a).unwrap(), &u).unwrap();
        assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn gauge_orthogonality_of_tangent_directions() {
        let dom = domain(8.0, 12.0, 41, 64);
        let conn = semisimple();
        let a = translation_deformation(conn.as_ref(), &dom, Translation::W1).unwrap();
        let (eps, _) = instanton_tangent_residual(conn.as_ref(), &a).unwrap();
        let u = bump(&dom, 8.6, 11.4, 5);
        let du = covariant_gradient(conn.as_ref(), &dom, &u).unwrap();
        let g = l2_metric_instanton(&a, &du).unwrap();
        let un = l2_scalar(&dom, &u, &u).unwrap().sqrt();
        assert!(g.abs() <= 1.01 * eps * un + 1e-12, "{g} vs {eps} * {un}");
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let a = TangentVectorInstanton::zeros(domain(5.0, 7.0, 12, 8));
        let b = TangentVectorInstanton::zeros(domain(5.0, 7.0, 12, 12));
        assert!(matches!(l2_metric_instanton(&a, &b), Err(Error::DomainMismatch(_))));
        let inside = TangentVectorInstanton::zeros(domain(1.0, 3.0, 12, 8));
        assert!(instanton_tangent_residual(semisimple().as_ref(), &inside).is_err());
        assert!(TangentVectorInstanton::new(domain(5.0, 7.0, 12, 8), vec![]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn metric_is_symmetric_positive_and_i_invariant(s1 in 0u64..10_000, s2 in 0u64..10_000, t in -2.0f64..2.0) {
            let dom = domain(3.0, 4.0, 9, 4);
            let a = random_tangent(&dom, s1);
            let b = random_tangent(&dom, s2);
            let gab = l2_metric_instanton(&a, &b).unwrap();
            prop_assert!((gab - l2_metric_instanton(&b, &a).unwrap()).abs() <= 1e-12 * gab.abs().max(1.0));
            let gaa = l2_metric_instanton(&a, &a).unwrap();
            prop_assert!(gaa > 0.0);
            let combo = TangentVectorInstanton::new(
                dom.clone(),
                a.values.iter().zip(&b.values).map(|(x, y)| std::array::from_fn(|m| x[m] + y[m] * c(t, 0.0))).collect(),
            ).unwrap();
            let lin = l2_metric_instanton(&combo, &a).unwrap();
            prop_assert!((lin - gaa - t * gab).abs() <= 1e-10 * (gaa + gab.abs()));
            for j in 1..=3 {
                let ia = apply_complex_structure(j, &a).unwrap();
                prop_assert!((l2_metric_instanton(&ia, &ia).unwrap() - gaa).abs() <= 1e-10 * gaa);
                let iia = apply_complex_structure(j, &ia).unwrap();
                prop_assert!(iia.values.iter().zip(&a.values).all(|(x, y)| (0..4).all(|m| (x[m] + y[m]).norm() < 1e-12 * (1.0 + y[m].norm()) * 10.0)));
            }
        }
    }
}
