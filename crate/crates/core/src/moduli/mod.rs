//! Hyperkähler linear algebra, tangent-space residuals on both sides of the
//! Nahm transform, L² metrics, the dimension formula and the `k = 1` chart.
//!
//! Nothing here assembles a moduli space: tangent conditions and metrics are
//! evaluated on explicit fields.

mod higgs;
mod instanton;

pub use higgs::{
    higgs_tangent_conditions, higgs_tangent_residual, l2_metric_higgs, DualGrid, HiggsBackground, TangentVectorHiggs,
};
pub use instanton::{
    apply_complex_structure, codifferential, covariant_gradient, instanton_tangent_residual, l2_metric_instanton,
    l2_scalar, translation_deformation, InstantonGrid, TangentVectorInstanton, Translation, RESIDUAL_MARGIN,
};

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `I₁, I₂, I₃` on `(z₁, z₂, w₁, w₂)`:
/// `I₁ = (−z₂, z₁, −w₂, w₁)`, `I₂ = (−w₁, w₂, z₁, −z₂)`, `I₃ = (−w₂, −w₁, z₂, z₁)`.
pub fn complex_structures() -> [Matrix4<f64>; 3] {
    let i1 = Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    );
    let i2 = Matrix4::new(
        0.0, 0.0, -1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    );
    let i3 = Matrix4::new(
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, -1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0,
    );
    [i1, i2, i3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuaternionCheck {
    /// `max_j ‖I_j² + Id‖`.
    pub square_defect: f64,
    /// `s` with `I₁I₂ = s·I₃`, or 0 if neither sign holds.
    pub product_sign: i32,
    /// `‖I₂I₁ + I₁I₂‖`.
    pub anticommutator: f64,
    /// `t` with `I₁I₂I₃ = t·Id`, or 0.
    pub triple_sign: i32,
    pub orthogonal: bool,
}

impl QuaternionCheck {
    pub fn holds(&self) -> bool {
        self.square_defect == 0.0 && self.product_sign != 0 && self.anticommutator == 0.0 && self.triple_sign != 0 && self.orthogonal
    }
}

pub fn quaternion_check() -> QuaternionCheck {
    let [i1, i2, i3] = complex_structures();
    let id = Matrix4::<f64>::identity();
    let square_defect = [i1, i2, i3].iter().map(|m| (m * m + id).norm()).fold(0.0, f64::max);
    let p = i1 * i2;
    let sign_of = |m: Matrix4<f64>, target: Matrix4<f64>| {
        if m == target {
            1
        } else if m == -target {
            -1
        } else {
            0
        }
    };
    QuaternionCheck {
        square_defect,
        product_sign: sign_of(p, i3),
        anticommutator: (i2 * i1 + p).norm(),
        triple_sign: sign_of(p * i3, id),
        orthogonal: [i1, i2, i3].iter().all(|m| m.transpose() * m == id),
    }
}

/// Real dimension `8k − 4` of the charge-`k` moduli space.
pub fn moduli_dimension(k: i64) -> Result<i64> {
    if k <= 0 {
        return Err(Error::InvalidParameter(format!("charge must be positive (no irreducible instantons at k = {k})")));
    }
    Ok(8 * k - 4)
}

/// Degree-one maps `f(w) = (w + b)/(cw + d)` with prescribed `f(0)` and `f′(0)`.
///
/// The two constraints `b/d = f(0)`, `(d − cb)/d² = f′(0)` leave `c` free:
/// `d = (1 − c f(0))/f′(0)`, `b = f(0) d`, excluding `c = 1/f(0)` where `d = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K1Chart {
    #[serde(with = "crate::serde_complex")]
    pub f0: C64,
    #[serde(with = "crate::serde_complex")]
    pub df0: C64,
    pub free_parameters: usize,
    #[serde(with = "crate::serde_complex::option")]
    pub excluded_c: Option<C64>,
    /// Real dimension of the torus fiber `T` (the `(±ξ₀)` choice).
    pub fiber_real_dim: i64,
    /// Real dimension of the base `ℂ` (the free coefficient).
    pub base_real_dim: i64,
    pub total_real_dim: i64,
    pub matches_dimension_formula: bool,
}

impl K1Chart {
    /// `(b, d)` at parameter `c`.
    pub fn coefficients(&self, c: C64) -> Result<(C64, C64)> {
        let d = (C64::new(1.0, 0.0) - c * self.f0) / self.df0;
        if d.norm() < 1e-14 {
            return Err(Error::InvalidParameter(format!("c = {c} drops the degree (d = 0)")));
        }
        Ok((self.f0 * d, d))
    }

    pub fn eval(&self, c: C64, w: C64) -> Result<C64> {
        let (b, d) = self.coefficients(c)?;
        let den = c * w + d;
        if den.norm() == 0.0 {
            return Err(Error::AtPole);
        }
        Ok((w + b) / den)
    }
}

pub fn k1_chart(f0: C64, df0: C64) -> Result<K1Chart> {
    if !(f0.re.is_finite() && f0.im.is_finite() && df0.re.is_finite() && df0.im.is_finite()) {
        return Err(Error::InvalidParameter("constraints must be finite".into()));
    }
    if df0.norm() == 0.0 {
        return Err(Error::InvalidParameter("f'(0) = 0 forces a degree drop".into()));
    }
    let excluded_c = (f0.norm() > 0.0).then(|| C64::new(1.0, 0.0) / f0);
    let fiber_real_dim = 2;
    let base_real_dim = 2;
    let total = fiber_real_dim + base_real_dim;
    Ok(K1Chart {
        f0,
        df0,
        free_parameters: 1,
        excluded_c,
        fiber_real_dim,
        base_real_dim,
        total_real_dim: total,
        matches_dimension_formula: moduli_dimension(1)? == total,
    })
}

/// Centered first-derivative stencil at index `i` of `n` points with spacing `h`.
///
/// Periodic axes use the fourth-order five-point stencil everywhere; on a
/// bounded axis it drops to second order in the two outermost layers.
pub(crate) fn stencil(n: usize, i: usize, h: f64, periodic: bool) -> Vec<(usize, f64)> {
    let c4 = [(-2i64, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];
    let at = |o: i64| (i as i64 + o).rem_euclid(n as i64) as usize;
    if periodic {
        return c4.iter().map(|&(o, w)| (at(o), w / h)).collect();
    }
    let n1 = n - 1;
    if i >= 2 && i + 2 <= n1 {
        c4.iter().map(|&(o, w)| (at(o), w / h)).collect()
    } else if i == 0 {
        vec![(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)]
    } else if i == n1 {
        vec![(n1, 1.5 / h), (n1 - 1, -2.0 / h), (n1 - 2, 0.5 / h)]
    } else {
        vec![(i - 1, -0.5 / h), (i + 1, 0.5 / h)]
    }
}
