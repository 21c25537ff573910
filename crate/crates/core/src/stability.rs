//! Parabolic degrees, instability witnesses for extension bundles, and the
//! non-existence obstructions.
//!
//! Degrees of subsheaves `L ⊂ E` on `T × P¹` are `d_inf ± α·area`, where
//! `d_inf` is the `O(b)`-twist degree along `P¹` and the sign depends on which
//! summand of `E|_{T_∞} = L_{ξ₀} ⊕ L_{−ξ₀}` contains `L|_{T_∞}`. Area is
//! normalized to 1 unless given.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::ORDER_TWO_TOL;
use crate::error::{Error, Result};
use crate::geometry::{lattice_distance, DualTorusPoint};
use crate::spectral::{jumping_points_unchecked, BundleModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `L|_{T_∞} ⊂ L_{−ξ₀}`
    Plus,
    /// `L|_{T_∞} ⊂ L_{ξ₀}`
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsheafSpec {
    pub d_inf: i64,
    pub side: Side,
    /// A side is only meaningful when `L|_{T_∞}` is flat.
    pub flat_at_infinity: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (-0.5..0.5).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must lie in [-1/2, 1/2), got {alpha}")))
    }
}

pub fn parabolic_degree(sub: &SubsheafSpec, alpha: f64, area: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(area > 0.0) {
        return Err(Error::InvalidParameter(format!("area must be positive, got {area}")));
    }
    if !sub.flat_at_infinity {
        return Err(Error::InvalidParameter("side is undefined: L restricted to the infinity fiber is not flat".into()));
    }
    let d = sub.d_inf as f64;
    Ok(match sub.side {
        Side::Plus => d + alpha * area,
        Side::Minus => d - alpha * area,
    })
}

/// `0 → p₁*L_{ξ₀} ⊗ p₂*O(b) → E → p₁*L_{−ξ₀} ⊗ p₂*O(−b) ⊗ I_Z → 0` with `|Z| = k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionBundleSpec {
    pub xi0: DualTorusPoint,
    pub b: i64,
    pub k: u32,
    /// Positions `(ξ-independent) w` of the ideal-sheaf points; all finite.
    #[serde(with = "crate::serde_complex::vec")]
    pub points: Vec<C64>,
}

impl ExtensionBundleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !self.points.is_empty() && self.points.len() != self.k as usize {
            return Err(Error::InvalidParameter(format!("{} points for k = {}", self.points.len(), self.k)));
        }
        if self.points.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::InvalidParameter("ideal-sheaf points must avoid the infinity fiber".into()));
        }
        Ok(())
    }

    /// `p₁*L_{ξ₀} ⊗ p₂*O(b)`, whose infinity restriction is `L_{ξ₀}`.
    pub fn destabilizer(&self) -> SubsheafSpec {
        SubsheafSpec { d_inf: self.b, side: Side::Minus, flat_at_infinity: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StabilityVerdict {
    Unstable { witness: SubsheafSpec, degree: f64 },
    /// The canonical subsheaf does not destabilize; this is not a proof of stability.
    NoDestabilizerFound { witness: SubsheafSpec, degree: f64 },
}

impl StabilityVerdict {
    pub fn is_unstable(&self) -> bool {
        matches!(self, StabilityVerdict::Unstable { .. })
    }

    pub fn degree(&self) -> f64 {
        match self {
            StabilityVerdict::Unstable { degree, .. } | StabilityVerdict::NoDestabilizerFound { degree, .. } => *degree,
        }
    }
}

pub fn alpha_stable_extension(spec: &ExtensionBundleSpec, alpha: f64) -> Result<StabilityVerdict> {
    spec.validate()?;
    let witness = spec.destabilizer();
    let degree = parabolic_degree(&witness, alpha, 1.0)?;
    Ok(if degree > 0.0 {
        StabilityVerdict::Unstable { witness, degree }
    } else {
        StabilityVerdict::NoDestabilizerFound { witness, degree }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstruction {
    Ok,
    /// `ξ₀ = −ξ₀` and `k = 1`.
    BlockedOrder2K1,
    /// `ξ₀ ≠ −ξ₀` and `μ = 0`.
    BlockedMu0,
}

pub fn existence_obstruction(k: u32, xi0: &DualTorusPoint, mu: C64) -> Result<Obstruction> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let order_two = xi0.is_order_two(ORDER_TWO_TOL);
    Ok(if order_two && k == 1 {
        Obstruction::BlockedOrder2K1
    } else if !order_two && mu == C64::new(0.0, 0.0) {
        Obstruction::BlockedMu0
    } else {
        Obstruction::Ok
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H0Report {
    /// Total multiplicity of finite jumping points on `|w| ≥ r_min`.
    pub finite: usize,
    /// `h⁰(T_∞, E ⊗ L_ξ)`.
    pub infinity: usize,
    pub total: usize,
    pub declared_k: u32,
    pub consistent: bool,
}

/// `Σ_w h⁰(T_w, E ⊗ L_ξ)` over the model domain and the infinity fiber,
/// compared with the declared `k`.
pub fn h0_total(bundle: &BundleModel, declared_k: u32, xi: &DualTorusPoint) -> Result<H0Report> {
    bundle.validate()?;
    let t = &bundle.torus;
    let finite = jumping_points_unchecked(bundle, xi, bundle.r_min, f64::INFINITY, &[1.0, -1.0]).iter().map(|p| p.multiplicity).sum();
    // E|_{T_∞} ⊗ L_ξ has a section in each summand with λ ≡ s·ζ_ξ
    let infinity = [1.0, -1.0].iter().filter(|&&s| lattice_distance(bundle.lambda - s * xi.zeta, t) < 1e-9).count();
    let total = finite + infinity;
    Ok(H0Report { finite, infinity, total, declared_k, consistent: total == declared_k as usize })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{reduce_dual, TorusSpec};
    use crate::su2::c;
    use proptest::prelude::*;

    fn t() -> TorusSpec {
        TorusSpec::default()
    }

    fn spec(b: i64) -> ExtensionBundleSpec {
        ExtensionBundleSpec { xi0: reduce_dual([0.3, 0.1], &t()), b, k: 1, points: vec![c(0.0, 0.0)] }
    }

    #[test]
    fn degree_examples() {
        let plus = SubsheafSpec { d_inf: 0, side: Side::Plus, flat_at_infinity: true };
        assert_eq!(parabolic_degree(&plus, 0.25, 1.0).unwrap(), 0.25);
        assert_eq!(parabolic_degree(&plus, 0.0, 3.0).unwrap(), 0.0);
        let minus = SubsheafSpec { d_inf: 1, side: Side::Minus, flat_at_infinity: true };
        assert_eq!(parabolic_degree(&minus, 0.25, 1.0).unwrap(), 0.75);
        assert!(parabolic_degree(&SubsheafSpec { flat_at_infinity: false, ..minus }, 0.25, 1.0).is_err());
        assert!(parabolic_degree(&minus, 0.5, 1.0).is_err());
    }

    #[test]
    fn extension_examples() {
        let v = alpha_stable_extension(&spec(1), 0.25).unwrap();
        assert!(v.is_unstable() && v.degree() == 0.75);
        let v = alpha_stable_extension(&spec(0), 0.25).unwrap();
        assert!(!v.is_unstable() && v.degree() == -0.25);
        let v = alpha_stable_extension(&spec(3), 0.0).unwrap();
        assert!(v.is_unstable() && v.degree() == 3.0);
        let mut bad = spec(1);
        bad.points = vec![c(f64::INFINITY, 0.0)];
        assert!(alpha_stable_extension(&bad, 0.0).is_err());
    }

    #[test]
    fn obstruction_examples() {
        let zero = reduce_dual([0.0, 0.0], &t());
        let generic = reduce_dual([0.3, 0.1], &t());
        assert_eq!(existence_obstruction(1, &zero, c(1.0, 0.0)).unwrap(), Obstruction::BlockedOrder2K1);
        assert_eq!(existence_obstruction(2, &generic, c(0.0, 0.0)).unwrap(), Obstruction::BlockedMu0);
        assert_eq!(existence_obstruction(1, &generic, c(1.0, 0.0)).unwrap(), Obstruction::Ok);
        assert_eq!(existence_obstruction(2, &zero, c(0.0, 0.0)).unwrap(), Obstruction::Ok);
    }

    #[test]
    fn h0_examples() {
        let lam = c(-0.05, 0.1);
        let b = BundleModel::rational(t(), lam, c(1.0, 0.0), 20.0).unwrap();
        let near = crate::geometry::DualTorusPoint::from_zeta(lam + c(0.01, 0.0), &t());
        let r = h0_total(&b, 1, &near).unwrap();
        assert!(r.consistent && r.finite == 1 && r.infinity == 0);
        // order-two asymptotic state with split infinity fiber
        let split = BundleModel::rational(t(), c(0.0, 0.0), c(1.0, 0.0), 20.0).unwrap();
        let r = h0_total(&split, 1, &reduce_dual([0.0, 0.0], &t())).unwrap();
        assert_eq!(r.infinity, 2);
        assert!(!r.consistent);
        let far = crate::geometry::DualTorusPoint::from_zeta(lam + c(0.2, 0.05), &t());
        let r = h0_total(&b, 1, &far).unwrap();
        assert_eq!(r.total, 0);
        assert!(!r.consistent);
    }

    proptest! {
        #[test]
        fn degree_is_affine(d in -20i64..20, a in -0.5f64..0.5, area in 0.1f64..10.0) {
            let s = SubsheafSpec { d_inf: d, side: Side::Plus, flat_at_infinity: true };
            let m = SubsheafSpec { side: Side::Minus, ..s };
            let p = parabolic_degree(&s, a, area).unwrap();
            let q = parabolic_degree(&m, a, area).unwrap();
            prop_assert!((p + q - 2.0 * d as f64).abs() < 1e-12);
            prop_assert!((p - q - 2.0 * a * area).abs() < 1e-12);
        }

        #[test]
        fn positive_twist_is_always_unstable(b in 1i64..10, a in -0.5f64..0.5) {
            prop_assert!(alpha_stable_extension(&spec(b), a).unwrap().is_unstable());
        }
    }
}
