//! Exact model solutions and decaying perturbations.
//!
//! Semisimple family, for `λ, μ ∈ ℂ`, `α ∈ [−½, ½)`:
//! `A = d + i·diag(a, −a)` with `a_x + i a_y = 2λ + 2μ/w` and `a_θ = α`,
//! i.e. `a = λ₁dx + λ₂dy + ((μ₁cosθ + μ₂sinθ)dx + (μ₂cosθ − μ₁sinθ)dy)/r + α dθ`
//! with `λ = (λ₁+iλ₂)/2`, `μ = (μ₁+iμ₂)/2`. Its Hitchin pair is
//! `B = d + iα·diag(1,−1) dθ`, `ψ_w = i(λ + μ/w)·diag(1,−1)`.
//!
//! Nilpotent solution, `L = ln r²`:
//! `B = d + i·diag(−1, 1) dθ/L`, `ψ_w = [[0, 1], [0, 0]]/(wL)`, which lifts to
//! `d + i·diag(−1,1)dθ/L + (rL)⁻¹[[0, e^{−iθ}(dx − i dy)], [−e^{iθ}(dx + i dy), 0]]`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{Connection, ConnectionSource, OneForm, Point, RadialDomain};
use crate::geometry::{lambda_to_xi, reduce_dual, DualTorusPoint, TorusSpec};
use crate::hitchin::{lift, HiggsPairOnPlane, HiggsSample, HiggsSource};
use crate::su2::{c, diag_i, h, random_unit_su2, Mat2, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Semisimple,
    Nilpotent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(with = "crate::serde_complex")]
    pub lambda: C64,
    #[serde(with = "crate::serde_complex")]
    pub mu: C64,
    pub alpha: f64,
    pub kind: ModelKind,
}

impl ModelParams {
    pub fn semisimple(lambda: C64, mu: C64, alpha: f64) -> Result<Self> {
        let p = ModelParams { lambda, mu, alpha, kind: ModelKind::Semisimple };
        p.validate()?;
        Ok(p)
    }

    pub fn nilpotent() -> Self {
        ModelParams { lambda: C64::new(0.0, 0.0), mu: C64::new(0.0, 0.0), alpha: 0.0, kind: ModelKind::Nilpotent }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= -0.5 && self.alpha < 0.5) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [-1/2, 1/2), got {}", self.alpha)));
        }
        if !(self.lambda.re.is_finite() && self.lambda.im.is_finite() && self.mu.re.is_finite() && self.mu.im.is_finite()) {
            return Err(Error::InvalidParameter("lambda and mu must be finite".into()));
        }
        if self.kind == ModelKind::Nilpotent && (self.lambda != C64::new(0.0, 0.0) || self.mu != C64::new(0.0, 0.0) || self.alpha != 0.0) {
            return Err(Error::InvalidParameter("the nilpotent model requires lambda = mu = alpha = 0".into()));
        }
        Ok(())
    }

    /// `(λ₁, λ₂)` with `λ = (λ₁ + iλ₂)/2`.
    pub fn lambda_pair(&self) -> [f64; 2] {
        [2.0 * self.lambda.re, 2.0 * self.lambda.im]
    }

    /// The asymptotic state `ξ₀` (before resolving the sign ambiguity).
    pub fn xi0(&self, torus: &TorusSpec) -> DualTorusPoint {
        reduce_dual(lambda_to_xi(self.lambda_pair(), torus), torus)
    }
}

/// Torus and radial cutoff for the model constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelDomain {
    pub torus: TorusSpec,
    pub r_min: f64,
}

impl Default for ModelDomain {
    fn default() -> Self {
        ModelDomain { torus: TorusSpec::default(), r_min: 2.0 }
    }
}

#[derive(Debug, Clone)]
struct ModelHiggs {
    params: ModelParams,
    r_min: f64,
}

const NIL: fn() -> Mat2 = || Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));

impl HiggsSource for ModelHiggs {
    fn r_min(&self) -> f64 {
        self.r_min
    }

    fn eval(&self, r: f64, theta: f64) -> HiggsSample {
        let winv = C64::from_polar(1.0 / r, -theta);
        match self.params.kind {
            ModelKind::Semisimple => HiggsSample {
                b_r: Mat2::zeros(),
                b_theta: diag_i(self.params.alpha),
                psi_w: h() * (I * (self.params.lambda + self.params.mu * winv)),
            },
            ModelKind::Nilpotent => {
                let l = 2.0 * r.ln();
                HiggsSample { b_r: Mat2::zeros(), b_theta: diag_i(-1.0 / l), psi_w: NIL() * (winv / l) }
            }
        }
    }

    fn jacobian(&self, r: f64, theta: f64) -> Option<[HiggsSample; 2]> {
        let winv = C64::from_polar(1.0 / r, -theta);
        let z = Mat2::zeros();
        Some(match self.params.kind {
            ModelKind::Semisimple => {
                let m = self.params.mu * winv;
                [
                    HiggsSample { b_r: z, b_theta: z, psi_w: h() * (I * (-m / r)) },
                    HiggsSample { b_r: z, b_theta: z, psi_w: h() * (I * (-I * m)) },
                ]
            }
            ModelKind::Nilpotent => {
                let l = 2.0 * r.ln();
                let dinv_l = -2.0 / (r * l * l);
                // d/dr (e^{-iθ}/(r L)) = -e^{-iθ}(L + 2)/(r² L²)
                let dpsi = winv * (-(l + 2.0) / (r * l * l));
                [
                    HiggsSample { b_r: z, b_theta: diag_i(-dinv_l), psi_w: NIL() * dpsi },
                    HiggsSample { b_r: z, b_theta: z, psi_w: NIL() * (-I * winv / l) },
                ]
            }
        })
    }
}

/// Hitchin pair of the model (semisimple or nilpotent).
pub fn hitchin_model(p: &ModelParams, domain: &ModelDomain) -> Result<HiggsPairOnPlane> {
    p.validate()?;
    domain.torus.validate()?;
    if !(domain.r_min > 0.0) {
        return Err(Error::InvalidParameter("r_min must be positive".into()));
    }
    if p.kind == ModelKind::Nilpotent && domain.r_min <= 1.0 {
        return Err(Error::InvalidParameter("the nilpotent model needs r_min > 1".into()));
    }
    Ok(HiggsPairOnPlane::new(Arc::new(ModelHiggs { params: *p, r_min: domain.r_min }), domain.torus))
}

pub fn semisimple_model(p: &ModelParams, domain: &ModelDomain) -> Result<Connection> {
    if p.kind != ModelKind::Semisimple {
        return Err(Error::InvalidParameter("semisimple_model needs semisimple parameters".into()));
    }
    Ok(lift(&hitchin_model(p, domain)?))
}

pub fn nilpotent_model(domain: &ModelDomain) -> Result<Connection> {
    Ok(lift(&hitchin_model(&ModelParams::nilpotent(), domain)?))
}

/// Either model, chosen by `p.kind`.
pub fn model_connection(p: &ModelParams, domain: &ModelDomain) -> Result<Connection> {
    match p.kind {
        ModelKind::Semisimple => semisimple_model(p, domain),
        ModelKind::Nilpotent => {
            p.validate()?;
            nilpotent_model(domain)
        }
    }
}

/// One term of a perturbation: `c·ρ(r)·s(r)·cos(pθ + k_n x + k_m y + φ)·T` in the
/// orthonormal component `component` (0..4 for `ρ, φ, x, y`), where
/// `ρ(r) = ½(1 + cos(ω ln r + β))` and `s(r) = 1` for torus-constant terms,
/// `(1 + r²)^{-1/2}` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationMode {
    pub component: usize,
    pub coefficient: f64,
    pub matrix: Mat2,
    pub p: i32,
    pub n: i32,
    pub m: i32,
    pub phase: f64,
    pub omega: f64,
    pub beta: f64,
}

/// `A + a` with `|a| ≤ amplitude·r^{−(1+δ)}`.
#[derive(Debug, Clone)]
pub struct Perturbed {
    pub base: Connection,
    pub delta: f64,
    pub amplitude: f64,
    pub modes: Vec<PerturbationMode>,
}

const PERTURBATION_MODES: usize = 8;

impl Perturbed {
    fn terms(&self, p: &Point) -> (OneForm, [OneForm; 4]) {
        let t = self.base.torus();
        let kx = 2.0 * PI / t.period_x;
        let ky = 2.0 * PI / t.period_y;
        let r = p.r;
        let mut a = [Mat2::zeros(); 4];
        let mut d = [[Mat2::zeros(); 4]; 4];
        if self.amplitude == 0.0 {
            return (a, d);
        }
        let lr = r.ln();
        let pw = self.amplitude * r.powf(-(1.0 + self.delta));
        let dpw = -(1.0 + self.delta) * pw / r;
        for md in &self.modes {
            let arg = md.omega * lr + md.beta;
            let rho = 0.5 * (1.0 + arg.cos());
            let drho = -0.5 * arg.sin() * md.omega / r;
            let (s, ds) = if md.n == 0 && md.m == 0 {
                (1.0, 0.0)
            } else {
                let q = (1.0 + r * r).sqrt();
                (1.0 / q, -r / (q * q * q))
            };
            let g = md.coefficient * pw * rho * s;
            let dg = md.coefficient * (dpw * rho * s + pw * drho * s + pw * rho * ds);
            // coordinate component: a_θ = r·a_φ
            let (g, dg) = if md.component == 1 { (r * g, g + r * dg) } else { (g, dg) };
            let fx = md.n as f64 * kx;
            let fy = md.m as f64 * ky;
            let ph = md.p as f64 * p.theta + fx * p.x + fy * p.y + md.phase;
            let (sn, cs) = ph.sin_cos();
            let k = md.component;
            a[k] += md.matrix * c(g * cs, 0.0);
            d[0][k] += md.matrix * c(dg * cs, 0.0);
            d[1][k] += md.matrix * c(-g * sn * md.p as f64, 0.0);
            d[2][k] += md.matrix * c(-g * sn * fx, 0.0);
            d[3][k] += md.matrix * c(-g * sn * fy, 0.0);
        }
        (a, d)
    }

    /// The perturbation alone at `p`, coordinate components.
    pub fn perturbation(&self, p: &Point) -> OneForm {
        self.terms(p).0
    }
}

impl ConnectionSource for Perturbed {
    fn torus(&self) -> TorusSpec {
        self.base.torus()
    }
    fn domain(&self) -> RadialDomain {
        self.base.domain()
    }
    fn eval(&self, p: &Point) -> OneForm {
        let b = self.base.eval(p);
        let (a, _) = self.terms(p);
        std::array::from_fn(|k| b[k] + a[k])
    }
    fn jacobian(&self, p: &Point) -> Option<[OneForm; 4]> {
        let jb = self.base.jacobian(p)?;
        let (_, d) = self.terms(p);
        Some(std::array::from_fn(|i| std::array::from_fn(|k| jb[i][k] + d[i][k])))
    }
    fn fd_steps(&self, p: &Point) -> [f64; 4] {
        self.base.fd_steps(p)
    }
}

/// Adds a seeded smooth su(2)-valued field bounded by `amplitude·r^{−(1+δ)}`
/// (orthonormal-frame Frobenius norm), with derivatives bounded by
/// `C·r^{−(2+δ)}`.
pub fn perturb(conn: Connection, delta: f64, amplitude: f64, seed: u64) -> Result<Connection> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("amplitude must be nonnegative, got {amplitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::with_capacity(PERTURBATION_MODES);
    let mut total = 0.0;
    for k in 0..PERTURBATION_MODES {
        let coefficient: f64 = rng.gen_range(0.2..1.0);
        total += coefficient;
        modes.push(PerturbationMode {
            component: k % 4,
            coefficient,
            matrix: random_unit_su2(&mut rng),
            p: rng.gen_range(0..=2),
            n: rng.gen_range(-1..=1),
            m: rng.gen_range(-1..=1),
            phase: rng.gen_range(0.0..2.0 * PI),
            omega: rng.gen_range(0.5..2.0),
            beta: rng.gen_range(0.0..2.0 * PI),
        });
    }
    for m in &mut modes {
        m.coefficient /= total;
    }
    Ok(Arc::new(Perturbed { base: conn, delta, amplitude, modes }))
}
