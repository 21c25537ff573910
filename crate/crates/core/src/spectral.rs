//! Spectral data of the Nahm transform for bundles `L_{ζ(w)} ⊕ L_{−ζ(w)}` near infinity.
//!
//! Twists are in ζ units (see [`crate::geometry`]): `L_ζ ⊗ L_{ζ'}` is trivial
//! exactly when `ζ + ζ'` lies in the lattice spanned by `π/L_y` and `iπ/L_x`.
//! A point `w` is a jumping point for `ξ` when `ζ(w) ≡ ±ζ_ξ` modulo that
//! lattice; the jumping points are the eigenvalues of the transformed Higgs
//! field `Φ(ξ)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num::{BigRational, ToPrimitive, Zero};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{covering_radius, dual_lattice, lattice_distance, lattice_reduce, DualTorusPoint, TorusSpec};
use crate::numerics::neville_to_zero;

/// Smallest twisted-Dolbeault symbol `|½(i k_n − k_m) + ζ|` over `|n|, |m| ≤ cutoff`,
/// `k_n = 2πn/L_x`, `k_m = 2πm/L_y`. Zero iff `ζ` is a lattice point.
pub fn dbar_min_singular(zeta: C64, torus: &TorusSpec, cutoff: usize) -> Result<f64> {
    if cutoff < 4 {
        return Err(Error::InvalidParameter(format!("mode cutoff must be at least 4, got {cutoff}")));
    }
    let n = cutoff as i64;
    let mut best = f64::INFINITY;
    for i in -n..=n {
        for j in -n..=n {
            let kn = 2.0 * PI * i as f64 / torus.period_x;
            let km = 2.0 * PI * j as f64 / torus.period_y;
            best = best.min((C64::new(-km, kn) * 0.5 + zeta).norm());
        }
    }
    Ok(best)
}

/// `ζ(w) = λ + Σ_j c_j w^{−(j+1)}` on `|w| ≥ r_min`, with `c_0 = μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleModel {
    pub torus: TorusSpec,
    #[serde(with = "crate::serde_complex")]
    pub lambda: C64,
    #[serde(with = "crate::serde_complex::vec")]
    pub tail: Vec<C64>,
    pub r_min: f64,
}

impl BundleModel {
    pub fn rational(torus: TorusSpec, lambda: C64, mu: C64, r_min: f64) -> Result<Self> {
        let b = BundleModel { torus, lambda, tail: vec![mu], r_min };
        b.validate()?;
        Ok(b)
    }

    /// The variation `|ζ(w) − λ|` must stay below half the covering radius.
    pub fn validate(&self) -> Result<()> {
        self.torus.validate()?;
        if !(self.r_min > 0.0) {
            return Err(Error::InvalidParameter("r_min must be positive".into()));
        }
        if self.tail.is_empty() {
            return Err(Error::InvalidParameter("tail needs at least the 1/w coefficient".into()));
        }
        let bound: f64 = self.tail.iter().enumerate().map(|(j, c)| c.norm() * self.r_min.powi(-(j as i32 + 1))).sum();
        let rho = covering_radius(&self.torus);
        if bound >= rho / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "r_min = {} too small: tail bound {bound:.4} >= half covering radius {:.4}",
                self.r_min,
                rho / 2.0
            )));
        }
        Ok(())
    }

    pub fn mu(&self) -> C64 {
        self.tail[0]
    }

    pub fn zeta(&self, w: C64) -> C64 {
        let u = 1.0 / w;
        let mut acc = C64::new(0.0, 0.0);
        for c in self.tail.iter().rev() {
            acc = (acc + c) * u;
        }
        self.lambda + acc
    }

    /// The asymptotic state `ξ₀` (twist `λ`).
    pub fn xi0(&self) -> DualTorusPoint {
        DualTorusPoint::from_zeta(self.lambda, &self.torus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `ζ(w) ≡ +ζ_ξ`
    Plus,
    /// `ζ(w) ≡ −ζ_ξ`
    Minus,
    Both,
}

impl Branch {
    fn signs(self) -> &'static [f64] {
        match self {
            Branch::Plus => &[1.0],
            Branch::Minus => &[-1.0],
            Branch::Both => &[1.0, -1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpingPoint {
    #[serde(with = "crate::serde_complex")]
    pub w: C64,
    pub multiplicity: usize,
    /// `+1` or `−1`: which of `±ζ_ξ` the point solves.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub xi: DualTorusPoint,
    pub points: Vec<JumpingPoint>,
    pub diagnostic: Option<String>,
}

impl SpectralData {
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }
}

/// Tolerance on `|ζ_ξ ∓ λ|` (mod lattice) for declaring `ξ` singular.
const SINGULAR_TOL: f64 = 1e-12;

/// Roots `u = 1/w` of `Σ_j c_j u^{j+1} = t`.
fn tail_roots(tail: &[C64], t: C64) -> Vec<C64> {
    // trim vanishing top coefficients
    let mut deg = tail.len();
    while deg > 0 && tail[deg - 1].norm() == 0.0 {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![t / tail[0]];
    }
    // monic polynomial u^deg + Σ a_k u^k with a_0 = −t/c_top
    let top = tail[deg - 1];
    let coeff = |k: usize| -> C64 {
        if k == 0 {
            -t / top
        } else {
            tail[k - 1] / top
        }
    };
    let mut comp = DMatrix::<C64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for k in 0..deg {
        comp[(k, deg - 1)] = -coeff(k);
    }
    let schur = Schur::new(comp);
    let (_, tri) = schur.unpack();
    (0..deg).map(|i| tri[(i, i)]).collect()
}

/// Jumping points with `r_lo ≤ |w| ≤ r_hi` (`r_hi` may be infinite).
///
/// For each sign `s` and lattice translate `ω`, solves `ζ(w) = s·ζ_ξ + ω`.
/// Only translates with `|s·ζ_ξ + ω − λ|` small enough to reach the annulus
/// are scanned, so the set is finite.
pub fn jumping_points(bundle: &BundleModel, xi: &DualTorusPoint, r_lo: f64, r_hi: f64, branch: Branch) -> Result<SpectralData> {
    bundle.validate()?;
    if !(r_lo >= bundle.r_min && r_hi > r_lo) {
        return Err(Error::DomainMismatch(format!(
            "annulus [{r_lo}, {r_hi}] must lie in the model domain |w| >= {}",
            bundle.r_min
        )));
    }
    let t = &bundle.torus;
    for &s in branch.signs() {
        if lattice_distance(s * xi.zeta - bundle.lambda, t) < SINGULAR_TOL {
            return Err(Error::SingularPoint);
        }
    }
    let points = jumping_points_unchecked(bundle, xi, r_lo, r_hi, branch.signs());
    let diagnostic = points.is_empty().then(|| format!("no jumping points with {r_lo} <= |w| <= {r_hi}"));
    Ok(SpectralData { xi: *xi, points, diagnostic })
}

/// Solutions of `ζ(w) ≡ s·ζ_ξ` on the annulus for each sign in `signs`, without
/// the singular-point check; `w = ∞` is never returned.
pub(crate) fn jumping_points_unchecked(bundle: &BundleModel, xi: &DualTorusPoint, r_lo: f64, r_hi: f64, signs: &[f64]) -> Vec<JumpingPoint> {
    let t = &bundle.torus;
    // |ζ(w) − λ| ≤ Σ|c_j| r_lo^{-(j+1)} on the annulus
    let reach: f64 = bundle.tail.iter().enumerate().map(|(j, c)| c.norm() * r_lo.powi(-(j as i32 + 1))).sum();
    let [g1, g2] = dual_lattice(t);
    let mut points: Vec<JumpingPoint> = Vec::new();
    for &s in signs {
        let base = lattice_reduce(s * xi.zeta - bundle.lambda, t);
        let na = (reach / g1.re).ceil() as i64 + 1;
        let nb = (reach / g2.im).ceil() as i64 + 1;
        for a in -na..=na {
            for b in -nb..=nb {
                let target = base + g1 * a as f64 + g2 * b as f64;
                if target.norm() > reach * (1.0 + 1e-12) {
                    continue;
                }
                let mut roots: Vec<C64> = tail_roots(&bundle.tail, target)
                    .into_iter()
                    .filter(|u| u.norm() > 0.0)
                    .map(|u| 1.0 / u)
                    .filter(|w| w.norm() >= r_lo && w.norm() <= r_hi)
                    .collect();
                roots.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
                for w in roots {
                    if let Some(p) = points.iter_mut().find(|p| p.sign == s as i8 && (p.w - w).norm() <= 1e-8 * w.norm()) {
                        p.multiplicity += 1;
                    } else {
                        points.push(JumpingPoint { w, multiplicity: 1, sign: s as i8 });
                    }
                }
            }
        }
    }
    points
}

/// Residue of `Φ` at the singular point `xi0`: the limit of `w(ξ_j)·(ζ_j − ζ₀)`
/// along `approach`, Neville-extrapolated to `ξ_j → ξ₀`. At `+ξ₀` (twist `λ`)
/// this is `μ`, at `−ξ₀` it is `−μ`.
pub fn phi_residue(bundle: &BundleModel, xi0: &DualTorusPoint, approach: &[DualTorusPoint]) -> Result<C64> {
    bundle.validate()?;
    let t = &bundle.torus;
    let plus = lattice_distance(xi0.zeta - bundle.lambda, t) < 1e-9;
    let minus = lattice_distance(xi0.zeta + bundle.lambda, t) < 1e-9;
    let branch = match (plus, minus) {
        (true, false) => Branch::Plus,
        (false, true) => Branch::Minus,
        (true, true) => Branch::Both,
        (false, false) => return Err(Error::InvalidParameter("xi0 is not a singular point of the bundle".into())),
    };
    if approach.len() < 2 {
        return Err(Error::InvalidParameter("need at least two approach points".into()));
    }
    let mut hs = Vec::with_capacity(approach.len());
    let mut values = Vec::with_capacity(approach.len());
    for xi in approach {
        let d = lattice_reduce(xi.zeta - xi0.zeta, t);
        let data = jumping_points(bundle, xi, bundle.r_min, f64::INFINITY, branch)?;
        let w = data
            .points
            .iter()
            .map(|p| p.w)
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .ok_or_else(|| Error::NoConvergence { estimates: Vec::new() })?;
        hs.push(d.norm());
        values.push(w * d);
    }
    let diag = neville_to_zero(&hs, &values);
    let n = diag.len();
    let est = diag[n - 1];
    let change = (diag[n - 1] - diag[n - 2]).norm();
    if !est.re.is_finite() || !est.im.is_finite() || change > 1e-6 * est.norm().max(1.0) {
        return Err(Error::NoConvergence { estimates: diag.iter().map(|z| (z.re, z.im)).collect() });
    }
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NahmWeights {
    /// `(1 + α, 1 − α)`.
    pub weights: (f64, f64),
    pub degree: i64,
    /// `deg V + Σ weights`, computed exactly.
    pub check: String,
    pub balanced: bool,
}

/// Parabolic weights of the transformed bundle at `±ξ₀` and the degree balance
/// `−2 + (1 + α) + (1 − α) = 0`, in exact rational arithmetic.
pub fn nahm_weights(alpha: f64) -> Result<NahmWeights> {
    if !(-0.5..0.5).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [-1/2, 1/2), got {alpha}")));
    }
    let a = BigRational::from_float(alpha).ok_or_else(|| Error::InvalidParameter("alpha not finite".into()))?;
    let one = BigRational::from_integer(1.into());
    let w1 = &one + &a;
    let w2 = &one - &a;
    let degree = -2i64;
    let check = BigRational::from_integer(degree.into()) + &w1 + &w2;
    Ok(NahmWeights {
        weights: (w1.to_f64().unwrap_or(f64::NAN), w2.to_f64().unwrap_or(f64::NAN)),
        degree,
        balanced: check.is_zero(),
        check: check.to_string(),
    })
}

/// Hypothesis region for the Fourier lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRegion {
    pub lambda_max: f64,
    pub w_min: f64,
}

impl GapRegion {
    /// `λ_max = 0.1ρ`, `w_min = 10|μ|/ρ` with `ρ` the covering radius.
    pub fn for_mu(mu: C64, torus: &TorusSpec) -> Self {
        let rho = covering_radius(torus);
        GapRegion { lambda_max: 0.1 * rho, w_min: 10.0 * mu.norm() / rho }
    }

    pub fn contains(&self, lambda: C64, w: C64) -> bool {
        lambda.norm() <= self.lambda_max && w.norm() >= self.w_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierGap {
    pub gap: f64,
    pub in_region: bool,
}

/// `Σ|k_nm + λ + μ/w|²|σ_nm|² − |λ + μ/w|² Σ|σ_nm|²` with `k_nm = 2π(n/L_x + i m/L_y)`.
/// Modes are `((n, m), σ_nm)`. Computed outside the hypothesis region too, flagged.
pub fn fourier_gap(lambda: C64, mu: C64, w: C64, sigma: &[((i64, i64), C64)], torus: &TorusSpec) -> FourierGap {
    let z = lambda + mu / w;
    let mut lhs = 0.0;
    let mut mass = 0.0;
    for &((n, m), s) in sigma {
        let k = C64::new(2.0 * PI * n as f64 / torus.period_x, 2.0 * PI * m as f64 / torus.period_y);
        lhs += (k + z).norm_sqr() * s.norm_sqr();
        mass += s.norm_sqr();
    }
    FourierGap { gap: lhs - z.norm_sqr() * mass, in_region: GapRegion::for_mu(mu, torus).contains(lambda, w) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::c;
    use proptest::prelude::*;

    fn t() -> TorusSpec {
        TorusSpec::default()
    }

    #[test]
    fn dbar_examples() {
        assert_eq!(dbar_min_singular(c(0.0, 0.0), &t(), 4).unwrap(), 0.0);
        assert!(dbar_min_singular(c(0.5, 0.0), &t(), 4).unwrap() < 1e-15);
        assert!((dbar_min_singular(c(0.25, 0.0), &t(), 4).unwrap() - 0.25).abs() < 1e-15);
        assert!(dbar_min_singular(c(0.0, 0.0), &t(), 3).is_err());
    }

    #[test]
    fn jumping_examples() {
        // μ = 1 needs R_min > 4√2 for the validity bound
        assert!(BundleModel::rational(t(), c(0.0, 0.0), c(1.0, 0.0), 5.0).is_err());
        let b = BundleModel::rational(t(), c(0.0, 0.0), c(1.0, 0.0), 6.0).unwrap();
        let xi = DualTorusPoint::from_zeta(c(0.05, 0.0), &t());
        let plus = jumping_points(&b, &xi, 6.0, 1e3, Branch::Plus).unwrap();
        assert_eq!(plus.points.len(), 1);
        assert!((plus.points[0].w - c(20.0, 0.0)).norm() < 1e-9 && plus.points[0].multiplicity == 1);
        let minus = jumping_points(&b, &xi, 6.0, 1e3, Branch::Minus).unwrap();
        assert!((minus.points[0].w - c(-20.0, 0.0)).norm() < 1e-9);
        let flat = BundleModel::rational(t(), c(0.1, 0.0), c(0.0, 0.0), 5.0).unwrap();
        let none = jumping_points(&flat, &xi, 5.0, 1e3, Branch::Both).unwrap();
        assert!(none.points.is_empty() && none.diagnostic.is_some());
        assert_eq!(jumping_points(&b, &DualTorusPoint::from_zeta(c(0.0, 0.0), &t()), 6.0, 1e3, Branch::Plus), Err(Error::SingularPoint));
    }

    #[test]
    fn second_order_tail_has_two_roots_at_most() {
        let b = BundleModel { torus: t(), lambda: c(0.0, 0.0), tail: vec![c(1.0, 0.0), c(2.0, 0.0)], r_min: 20.0 };
        b.validate().unwrap();
        let xi = DualTorusPoint::from_zeta(c(0.01, 0.0), &t());
        let d = jumping_points(&b, &xi, 20.0, 1e4, Branch::Plus).unwrap();
        for p in &d.points {
            assert!(lattice_distance(b.zeta(p.w) - xi.zeta, &t()) < 1e-10);
        }
        assert_eq!(d.total_multiplicity(), 1);
    }

    #[test]
    fn residue_examples() {
        for (mu, sign) in [(c(1.0, 0.0), 1.0), (c(3.0, 4.0), 1.0), (c(1.0, 0.0), -1.0)] {
            let lam = c(-0.05, 0.1);
            let b = BundleModel::rational(t(), lam, mu, 100.0).unwrap();
            let z0 = lam * sign;
            let xi0 = DualTorusPoint::from_zeta(z0, &t());
            let seq: Vec<DualTorusPoint> = (1..=6).map(|j| DualTorusPoint::from_zeta(z0 + c(0.1 * 2f64.powi(-j) * 0.01, 0.0), &t())).collect();
            let r = phi_residue(&b, &xi0, &seq).unwrap();
            assert!((r - mu * sign).norm() < 1e-8, "{r}");
        }
    }

    #[test]
    fn nahm_weight_examples() {
        for (a, w) in [(0.0, (1.0, 1.0)), (0.25, (1.25, 0.75)), (-0.4, (0.6, 1.4))] {
            let n = nahm_weights(a).unwrap();
            assert!(n.balanced && n.check == "0");
            assert!((n.weights.0 - w.0).abs() < 1e-15 && (n.weights.1 - w.1).abs() < 1e-15);
        }
        assert!(nahm_weights(0.5).is_err());
    }

    #[test]
    fn fourier_gap_examples() {
        let g = fourier_gap(c(0.01, 0.0), c(1.0, 0.0), c(200.0, 0.0), &[((0, 0), c(1.0, 0.0))], &t());
        assert!(g.gap.abs() < 1e-15 && g.in_region);
        let g = fourier_gap(c(0.01, 0.0), c(1.0, 0.0), c(200.0, 0.0), &[((1, 0), c(1.0, 0.0))], &t());
        assert!(g.gap > 0.0);
        assert_eq!(fourier_gap(c(0.01, 0.0), c(1.0, 0.0), c(200.0, 0.0), &[], &t()).gap, 0.0);
    }

    proptest! {
        #[test]
        fn jumping_points_solve_the_twist_equation(re in -0.5f64..0.5, im in -0.5f64..0.5, mr in -2.0f64..2.0, mi in -2.0f64..2.0) {
            let b = BundleModel::rational(t(), c(-0.05, 0.1), c(mr, mi), 20.0).unwrap();
            let xi = DualTorusPoint::from_zeta(c(re, im), &t());
            if let Ok(d) = jumping_points(&b, &xi, 20.0, 1e4, Branch::Both) {
                for p in d.points {
                    let target = xi.zeta * p.sign as f64;
                    prop_assert!(lattice_distance(b.zeta(p.w) - target, &t()) < 1e-10);
                }
            }
        }

        #[test]
        fn dbar_vanishes_exactly_on_lattice(i in -20i32..=20, j in -20i32..=20) {
            let z = c(i as f64 * 0.025, j as f64 * 0.025);
            let on = lattice_distance(z, &t()) < 1e-12;
            let v = dbar_min_singular(z, &t(), 8).unwrap();
            prop_assert_eq!(v < 1e-12, on);
        }
    }
}
