//! Linearized Hitchin conditions for `(B, Φ)` on the dual torus.
//!
//! With `ξ = (ξ₁, ξ₂)` periodic of period 1, `∇_j = ∂_j + [B_j, ·]` and
//! `∂_ξ̄ = ½(∂₁ + i∂₂)`, a tangent `(b, φ)` must satisfy
//!
//! - (i) `∇₁b₂ − ∇₂b₁ − 2i([φ, Φ†] + [Φ, φ†]) = 0`
//! - (ii) `∇_ξ̄ φ + [b_ξ̄, Φ] = 0`
//! - (iii) `d_B* b + [Φ, φ†] + [Φ†, φ] = 0`
//!
//! (i) and (ii) linearize `F₁₂ − 2i[Φ, Φ†] = 0` and `∂̄_B Φ = 0`; (iii) is
//! orthogonality to gauge orbits under `ĝ = Σ w (Re tr b₁†b₂ + 2 Re tr φ₁φ₂†)`,
//! with `d_B*` the exact adjoint of the discrete `d_B`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::stencil;
use crate::error::{Error, Result};
use crate::geometry::DualTorusPoint;

pub type CMat = DMatrix<C64>;

/// Uniform periodic `n₁ × n₂` grid on the dual torus, row-major in `(i₁, i₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualGrid {
    pub n1: usize,
    pub n2: usize,
}

impl DualGrid {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 4 || n2 < 4 {
            return Err(Error::InvalidParameter("dual grid needs at least 4 points per direction".into()));
        }
        Ok(DualGrid { n1, n2 })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn xi(&self, i: usize) -> [f64; 2] {
        [(i / self.n2) as f64 / self.n1 as f64, (i % self.n2) as f64 / self.n2 as f64]
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    fn derivative(&self, f: &[CMat], dim: usize) -> Vec<CMat> {
        let (n, h) = if dim == 0 { (self.n1, 1.0 / self.n1 as f64) } else { (self.n2, 1.0 / self.n2 as f64) };
        (0..self.len())
            .map(|i| {
                let mut idx = [i / self.n2, i % self.n2];
                let here = idx[dim];
                let mut acc = CMat::zeros(f[i].nrows(), f[i].ncols());
                for (j, w) in stencil(n, here, h, true) {
                    idx[dim] = j;
                    acc += &f[idx[0] * self.n2 + idx[1]] * C64::new(w, 0.0);
                }
                acc
            })
            .collect()
    }
}

fn comm(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Background `(B, Φ)`: `B = B₁dξ₁ + B₂dξ₂` in `u(k)` and `Φ` the `dξ`-coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct HiggsBackground {
    pub grid: DualGrid,
    pub rank: usize,
    pub b: Vec<[CMat; 2]>,
    pub phi: Vec<CMat>,
    /// Punctures `±ξ₀`; the grid must avoid them.
    pub singular: Vec<DualTorusPoint>,
}

impl HiggsBackground {
    pub fn new(grid: DualGrid, rank: usize, b: Vec<[CMat; 2]>, phi: Vec<CMat>, singular: Vec<DualTorusPoint>) -> Result<Self> {
        let bg = HiggsBackground { grid, rank, b, phi, singular };
        bg.validate()?;
        Ok(bg)
    }

    pub fn from_fn(grid: DualGrid, rank: usize, singular: Vec<DualTorusPoint>, f: impl Fn([f64; 2]) -> ([CMat; 2], CMat)) -> Result<Self> {
        let (b, phi) = (0..grid.len()).map(|i| f(grid.xi(i))).unzip();
        Self::new(grid, rank, b, phi, singular)
    }

    fn validate(&self) -> Result<()> {
        let k = self.rank;
        if k == 0 {
            return Err(Error::InvalidParameter("rank must be positive".into()));
        }
        let ok = self.b.len() == self.grid.len()
            && self.phi.len() == self.grid.len()
            && self.b.iter().flatten().chain(&self.phi).all(|m| m.shape() == (k, k));
        if !ok {
            return Err(Error::DomainMismatch(format!("background fields do not match a rank-{k} field on the grid")));
        }
        for i in 0..self.grid.len() {
            let node = DualTorusPoint { xi: self.grid.xi(i), zeta: C64::new(0.0, 0.0) };
            if self.singular.iter().any(|s| node.torus_distance(s) < 1e-9) {
                return Err(Error::SingularPoint);
            }
        }
        Ok(())
    }
}

/// A tangent `(b, φ)` on a dual-torus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVectorHiggs {
    pub grid: DualGrid,
    pub b: Vec<[CMat; 2]>,
    pub phi: Vec<CMat>,
}

impl TangentVectorHiggs {
    pub fn zeros(grid: DualGrid, rank: usize) -> Self {
        TangentVectorHiggs {
            grid,
            b: vec![[CMat::zeros(rank, rank), CMat::zeros(rank, rank)]; grid.len()],
            phi: vec![CMat::zeros(rank, rank); grid.len()],
        }
    }

    fn check(&self, rank: usize, grid: &DualGrid) -> Result<()> {
        let ok = self.grid == *grid
            && self.b.len() == grid.len()
            && self.phi.len() == grid.len()
            && self.b.iter().flatten().chain(&self.phi).all(|m| m.shape() == (rank, rank));
        if ok {
            Ok(())
        } else {
            Err(Error::DomainMismatch("tangent does not live on the background's grid and rank".into()))
        }
    }
}

/// Pointwise values of conditions (i), (ii), (iii).
pub fn higgs_tangent_conditions(bg: &HiggsBackground, t: &TangentVectorHiggs) -> Result<[Vec<CMat>; 3]> {
    bg.validate()?;
    t.check(bg.rank, &bg.grid)?;
    let g = &bg.grid;
    let i = C64::new(0.0, 1.0);
    let half = C64::new(0.5, 0.0);
    let comp = |j: usize| t.b.iter().map(|b| b[j].clone()).collect::<Vec<_>>();
    let (b1, b2) = (comp(0), comp(1));
    let (d1b1, d2b1) = (g.derivative(&b1, 0), g.derivative(&b1, 1));
    let (d1b2, d2b2) = (g.derivative(&b2, 0), g.derivative(&b2, 1));
    let (d1p, d2p) = (g.derivative(&t.phi, 0), g.derivative(&t.phi, 1));
    let mut out: [Vec<CMat>; 3] = Default::default();
    for p in 0..g.len() {
        let [bb1, bb2] = &bg.b[p];
        let (big, small) = (&bg.phi[p], &t.phi[p]);
        let (big_h, small_h) = (big.adjoint(), small.adjoint());
        let nab = |d: &CMat, bj: &CMat, f: &CMat| d + comm(bj, f);
        let c1 = nab(&d1b2[p], bb1, &b2[p]) - nab(&d2b1[p], bb2, &b1[p]) - (comm(small, &big_h) + comm(big, &small_h)) * (i * 2.0);
        let dbar = (nab(&d1p[p], bb1, small) + nab(&d2p[p], bb2, small) * i) * half;
        let c2 = dbar + comm(&((&b1[p] + &b2[p] * i) * half), big);
        let c3 = -(nab(&d1b1[p], bb1, &b1[p]) + nab(&d2b2[p], bb2, &b2[p])) + comm(big, &small_h) + comm(&big_h, small);
        out[0].push(c1);
        out[1].push(c2);
        out[2].push(c3);
    }
    Ok(out)
}

/// L² norms of conditions (i), (ii), (iii).
pub fn higgs_tangent_residual(bg: &HiggsBackground, t: &TangentVectorHiggs) -> Result<(f64, f64, f64)> {
    let c = higgs_tangent_conditions(bg, t)?;
    let w = bg.grid.weight();
    let norm = |v: &[CMat]| (w * v.iter().map(|m| m.norm_squared()).sum::<f64>()).sqrt();
    Ok((norm(&c[0]), norm(&c[1]), norm(&c[2])))
}

/// `ĝ(t₁, t₂) = Σ w (Re tr(b₁†b₂) + 2 Re tr(φ₁φ₂†))`.
pub fn l2_metric_higgs(t1: &TangentVectorHiggs, t2: &TangentVectorHiggs) -> Result<f64> {
    if t1.grid != t2.grid || t1.b.len() != t2.b.len() || t1.phi.len() != t2.phi.len() {
        return Err(Error::DomainMismatch("tangent vectors live on different grids".into()));
    }
    if t1.phi.iter().zip(&t2.phi).any(|(a, b)| a.shape() != b.shape()) {
        return Err(Error::DomainMismatch("tangent vectors have different ranks".into()));
    }
    let s: f64 = (0..t1.b.len())
        .map(|p| re_inner(&t1.b[p][0], &t2.b[p][0]) + re_inner(&t1.b[p][1], &t2.b[p][1]) + 2.0 * re_inner(&t2.phi[p], &t1.phi[p]))
        .sum();
    Ok(s * t1.grid.weight())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{reduce_dual, TorusSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn cm(rows: &[[C64; 2]; 2]) -> CMat {
        CMat::from_fn(2, 2, |a, b| rows[a][b])
    }

    fn z(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_mat<R: Rng>(rng: &mut R, k: usize) -> CMat {
        CMat::from_fn(k, k, |_, _| z(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn anti_hermitian(m: CMat) -> CMat {
        (&m - m.adjoint()) * z(0.5, 0.0)
    }

    fn punctures() -> Vec<DualTorusPoint> {
        let t = TorusSpec::default();
        let x = reduce_dual([0.3, 0.1], &t);
        vec![x, x.neg(&t)]
    }

    /// Non-commuting smooth background.
    fn background(grid: DualGrid) -> HiggsBackground {
        HiggsBackground::from_fn(grid, 2, punctures(), |xi| {
            let (s, c) = (std::f64::consts::TAU * xi[0]).sin_cos();
            let b1 = cm(&[[z(0.0, 0.3 * c), z(0.2, 0.1)], [z(-0.2, 0.1), z(0.0, -0.3 * c)]]);
            let b2 = cm(&[[z(0.0, 0.1), z(0.0, 0.0)], [z(0.0, 0.0), z(0.0, -0.1 + 0.2 * s)]]);
            let phi = cm(&[[z(0.5, 0.1 * s), z(0.4, 0.0)], [z(0.0, 0.2), z(-0.5, 0.0)]]);
            ([b1, b2], phi)
        })
        .unwrap()
    }

    fn random_tangent(grid: DualGrid, seed: u64) -> TangentVectorHiggs {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = grid.len();
        let b = (0..n).map(|_| [anti_hermitian(random_mat(&mut rng, 2)), anti_hermitian(random_mat(&mut rng, 2))]).collect();
        let phi = (0..n).map(|_| random_mat(&mut rng, 2)).collect();
        TangentVectorHiggs { grid, b, phi }
    }

    #[test]
    fn zero_tangent_is_tangent() {
        let g = DualGrid::new(6, 6).unwrap();
        let r = higgs_tangent_residual(&background(g), &TangentVectorHiggs::zeros(g, 2)).unwrap();
        assert_eq!(r, (0.0, 0.0, 0.0));
    }

    #[test]
    fn abelian_constant_case() {
        let g = DualGrid::new(6, 5).unwrap();
        let d = |a: C64, b: C64| cm(&[[a, z(0.0, 0.0)], [z(0.0, 0.0), b]]);
        let bg = HiggsBackground::from_fn(g, 2, punctures(), |_| {
            ([d(z(0.0, 0.3), z(0.0, -0.3)), d(z(0.0, 0.1), z(0.0, 0.2))], d(z(1.0, 0.5), z(-0.2, 0.0)))
        })
        .unwrap();
        let t = TangentVectorHiggs {
            grid: g,
            b: vec![[d(z(0.0, 0.7), z(0.0, 0.1)), d(z(0.0, -0.4), z(0.0, 0.0))]; g.len()],
            phi: vec![d(z(0.3, -0.2), z(1.0, 1.0)); g.len()],
        };
        let (a, b, c) = higgs_tangent_residual(&bg, &t).unwrap();
        assert!(a <= 1e-10 && b <= 1e-10 && c <= 1e-10);
    }

    #[test]
    fn grid_touching_a_puncture_is_rejected() {
        let t = TorusSpec::default();
        let x = reduce_dual([0.25, 0.5], &t);
        let g = DualGrid::new(4, 4).unwrap();
        let err = HiggsBackground::from_fn(g, 1, vec![x, x.neg(&t)], |_| ([CMat::zeros(1, 1), CMat::zeros(1, 1)], CMat::zeros(1, 1)));
        assert_eq!(err.unwrap_err(), Error::SingularPoint);
    }

    #[test]
    fn third_condition_is_gauge_orthogonality() {
        // ĝ(t, (−d_B u, [u, Φ])) = −⟨(iii)(t), u⟩ exactly
        let g = DualGrid::new(6, 7).unwrap();
        let bg = background(g);
        let t = random_tangent(g, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let u: Vec<CMat> = (0..g.len()).map(|_| anti_hermitian(random_mat(&mut rng, 2))).collect();
        let (d1, d2) = (g.derivative(&u, 0), g.derivative(&u, 1));
        let orbit = TangentVectorHiggs {
            grid: g,
            b: (0..g.len())
                .map(|p| [-(&d1[p] + comm(&bg.b[p][0], &u[p])), -(&d2[p] + comm(&bg.b[p][1], &u[p]))])
                .collect(),
            phi: (0..g.len()).map(|p| comm(&u[p], &bg.phi[p])).collect(),
        };
        let lhs = l2_metric_higgs(&t, &orbit).unwrap();
        let c3 = &higgs_tangent_conditions(&bg, &t).unwrap()[2];
        let rhs = -g.weight() * (0..g.len()).map(|p| re_inner(&c3[p], &u[p])).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    /// Real coordinates of a tangent: `b` entries (re, im) then `φ` entries.
    fn flatten(t: &TangentVectorHiggs) -> Vec<f64> {
        t.b.iter().flatten().chain(&t.phi).flat_map(|m| m.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect()
    }

    fn unflatten(v: &[f64], grid: DualGrid, k: usize) -> TangentVectorHiggs {
        let mut it = v.chunks(2).map(|p| z(p[0], p[1]));
        let mut next = || CMat::from_iterator(k, k, it.by_ref().take(k * k).collect::<Vec<_>>());
        let b = (0..grid.len()).map(|_| [next(), next()]).collect();
        let phi = (0..grid.len()).map(|_| next()).collect();
        TangentVectorHiggs { grid, b, phi }
    }

    #[test]
    fn projection_onto_the_constraint_kernel_removes_the_residual() {
        // oracle: SVD of the real matrix of the linear map t ↦ ((i), (ii), (iii))
        let g = DualGrid::new(4, 4).unwrap();
        let bg = background(g);
        let dim = flatten(&TangentVectorHiggs::zeros(g, 2)).len();
        let apply = |v: &[f64]| -> Vec<f64> {
            let c = higgs_tangent_conditions(&bg, &unflatten(v, g, 2)).unwrap();
            c.iter().flatten().flat_map(|m| m.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect()
        };
        let cols: Vec<Vec<f64>> = (0..dim)
            .map(|j| {
                let mut e = vec![0.0; dim];
                e[j] = 1.0;
                apply(&e)
            })
            .collect();
        let rows = cols[0].len();
        let m = nalgebra::DMatrix::from_fn(rows, dim, |r, c| cols[c][r]);
        let svd = m.svd(false, true);
        let vt = svd.v_t.unwrap();
        let smax = svd.singular_values.max();
        let null: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] < 1e-9 * smax).collect();
        assert!(!null.is_empty());
        let x = flatten(&random_tangent(g, 21));
        let mut proj = vec![0.0; dim];
        for &i in &null {
            let row = vt.row(i);
            let c: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            for (p, a) in proj.iter_mut().zip(row.iter()) {
                *p += c * a;
            }
        }
        let before = higgs_tangent_residual(&bg, &unflatten(&x, g, 2)).unwrap();
        let after = higgs_tangent_residual(&bg, &unflatten(&proj, g, 2)).unwrap();
        assert!(before.0 + before.1 + before.2 > 0.1);
        assert!(after.0 + after.1 + after.2 < 1e-8, "{after:?}");
    }

    proptest! {
        #[test]
        fn higgs_metric_is_symmetric_and_positive(s1 in 0u64..10_000, s2 in 0u64..10_000) {
            let g = DualGrid::new(4, 5).unwrap();
            let (a, b) = (random_tangent(g, s1), random_tangent(g, s2));
            let gab = l2_metric_higgs(&a, &b).unwrap();
            prop_assert!((gab - l2_metric_higgs(&b, &a).unwrap()).abs() <= 1e-12 * gab.abs().max(1.0));
            prop_assert!(l2_metric_higgs(&a, &a).unwrap() > 0.0);
        }
    }
}
