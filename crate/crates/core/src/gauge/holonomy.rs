//! Parallel transport, holonomy and the monodromy drift inequality.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{curvature, ConnectionSource, OneForm, Point};
use crate::error::{Error, Result};
use crate::geometry::{Loop, LoopKind};
use crate::su2::{exp_traceless, frob, Mat2, Su2Element};

fn contract(a: &OneForm, v: &[f64; 4]) -> Mat2 {
    let mut s = Mat2::zeros();
    for k in 0..4 {
        if v[k] != 0.0 {
            s += a[k] * C64::new(v[k], 0.0);
        }
    }
    s
}

/// Transport along `path(t)`, `t ∈ [0, 1]`, solving `h' = −A(γ')h` with the
/// exponential midpoint rule. Later steps multiply on the left.
pub fn path_transport<F>(conn: &dyn ConnectionSource, path: F, steps: usize) -> Su2Element
where
    F: Fn(f64) -> (Point, [f64; 4]),
{
    let dt = 1.0 / steps as f64;
    let mut h = Mat2::identity();
    for k in 0..steps {
        let (p, v) = path((k as f64 + 0.5) * dt);
        let x = contract(&conn.eval(&p), &v) * C64::new(-dt, 0.0);
        h = exp_traceless(&x) * h;
        if k % 64 == 63 {
            h = *Su2Element::renormalize(&h).matrix();
        }
    }
    Su2Element::renormalize(&h)
}

/// Holonomy of a closed loop, based at its start point.
pub fn holonomy(conn: &dyn ConnectionSource, lp: &Loop, steps: usize) -> Result<Su2Element> {
    if steps < 16 {
        return Err(Error::InvalidParameter(format!("holonomy needs at least 16 steps, got {steps}")));
    }
    let (lo, hi) = lp.radial_range();
    conn.domain().check(lo)?;
    conn.domain().check(hi)?;
    let torus = conn.torus();
    Ok(path_transport(conn, |t| lp.sample(t, &torus), steps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleKind {
    X,
    Y,
    Theta,
}

/// A one-parameter family of circles whose base point moves linearly in
/// coordinates from `start` (t = 0) to `end` (t = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleFamily {
    pub kind: CircleKind,
    pub start: Point,
    pub end: Point,
}

impl CircleFamily {
    fn base(&self, t: f64) -> Point {
        let a = self.start.as_array();
        let b = self.end.as_array();
        Point::from_array(std::array::from_fn(|k| a[k] + t * (b[k] - a[k])))
    }

    fn base_velocity(&self) -> [f64; 4] {
        let a = self.start.as_array();
        let b = self.end.as_array();
        std::array::from_fn(|k| b[k] - a[k])
    }

    fn circle(&self, t: f64) -> Loop {
        let kind = match self.kind {
            CircleKind::X => LoopKind::XCircle,
            CircleKind::Y => LoopKind::YCircle,
            CircleKind::Theta => LoopKind::ThetaCircle,
        };
        Loop { kind, base: self.base(t), samples: 16, reversed: false }
    }

    fn validate(&self, conn: &dyn ConnectionSource) -> Result<()> {
        let d = conn.domain();
        for p in [self.start, self.end] {
            if !p.as_array().iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidParameter("circle family endpoints must be finite".into()));
            }
            d.check(p.r)?;
        }
        if self.kind == CircleKind::Theta && (self.start.r <= 0.0 || self.end.r <= 0.0) {
            return Err(Error::InvalidParameter("theta circles need r > 0".into()));
        }
        Ok(())
    }
}

fn metric_norm(p: &Point, v: &[f64; 4]) -> f64 {
    (v[0] * v[0] + p.r * p.r * v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    /// `max_t (LHS − RHS)`.
    pub defect: f64,
    pub max_lhs: f64,
    pub max_rhs: f64,
    pub samples: usize,
}

/// Checks `|∂_t(h(t)⁻¹ m(t) h(t))| ≤ ∫_{circle(t)} |F_A|·|∂_t γ|·|∂_s γ| ds`
/// at `samples` values of `t ∈ (0, 1)`.
///
/// `m(t)` is the monodromy of the circle through the base point `p(t)` and
/// `h(t)` the transport from `p(0)` to `p(t)`. The left side is a central
/// difference in `t`; the right side is a midpoint quadrature with `steps`
/// nodes, which is also the holonomy step count.
pub fn monodromy_drift_defect(
    conn: &dyn ConnectionSource,
    family: &CircleFamily,
    samples: usize,
    steps: usize,
) -> Result<DriftReport> {
    family.validate(conn)?;
    if samples == 0 || steps < 16 {
        return Err(Error::InvalidParameter("need samples >= 1 and steps >= 16".into()));
    }
    let torus = conn.torus();
    let vel = family.base_velocity();
    let dt = 1e-4;
    let conj_monodromy = |t: f64| -> Su2Element {
        let h = path_transport(conn, |s| (family.base(s * t), vel.map(|v| v * t)), steps.max(64));
        let m = path_transport(conn, |s| family.circle(t).sample(s, &torus), steps);
        h.inverse().mul(&m).mul(&h)
    };
    let per_sample: Vec<Result<(f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = dt + (1.0 - 2.0 * dt) * (i as f64 + 0.5) / samples as f64;
            let qp = conj_monodromy(t + dt);
            let qm = conj_monodromy(t - dt);
            let lhs = frob(&(qp.matrix() - qm.matrix())) / (2.0 * dt);
            let lp = family.circle(t);
            let mut rhs = 0.0;
            for k in 0..steps {
                let s = (k as f64 + 0.5) / steps as f64;
                let (p, vs) = lp.sample(s, &torus);
                let f = curvature(conn, &p)?.norm();
                rhs += f * metric_norm(&p, &vel) * metric_norm(&p, &vs) / steps as f64;
            }
            Ok((lhs, rhs))
        })
        .collect();
    let mut report = DriftReport { defect: f64::NEG_INFINITY, max_lhs: 0.0, max_rhs: 0.0, samples };
    for r in per_sample {
        let (lhs, rhs) = r?;
        report.defect = report.defect.max(lhs - rhs);
        report.max_lhs = report.max_lhs.max(lhs);
        report.max_rhs = report.max_rhs.max(rhs);
    }
    Ok(report)
}
