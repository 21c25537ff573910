//! 2×2 complex matrices, the Lie algebra su(2) and the group SU(2).

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub type Mat2 = Matrix2<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zero() -> Mat2 {
    Mat2::zeros()
}

pub fn identity() -> Mat2 {
    Mat2::identity()
}

/// `diag(1, -1)`.
pub fn h() -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

pub fn sigma1() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn sigma2() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn sigma3() -> Mat2 {
    h()
}

/// `i·diag(a, -a)`.
pub fn diag_i(a: f64) -> Mat2 {
    Mat2::new(c(0.0, a), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -a))
}

pub fn dagger(m: &Mat2) -> Mat2 {
    m.adjoint()
}

pub fn comm(a: &Mat2, b: &Mat2) -> Mat2 {
    a * b - b * a
}

/// Frobenius norm.
pub fn frob(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob_sqr(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// `Re tr(a† b)`, the real Frobenius inner product.
pub fn inner(a: &Mat2, b: &Mat2) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Largest violation of `m ∈ su(2)`: `max(‖m + m†‖, |tr m|)`.
pub fn su2_defect(m: &Mat2) -> f64 {
    frob(&(m + m.adjoint())).max(m.trace().norm())
}

/// Projection onto su(2): anti-hermitian traceless part.
pub fn project_su2(m: &Mat2) -> Mat2 {
    let ah = (m - m.adjoint()) * c(0.5, 0.0);
    let t = ah.trace() * c(0.5, 0.0);
    ah - Mat2::identity() * t
}

/// Coordinates `(a, b, c)` of `X = i(a σ₁ + b σ₂ + c σ₃)` for `X ∈ su(2)`.
pub fn su2_coords(m: &Mat2) -> [f64; 3] {
    // tr(σ_j X) = 2 i x_j
    let t1 = (sigma1() * m).trace();
    let t2 = (sigma2() * m).trace();
    let t3 = (sigma3() * m).trace();
    [t1.im / 2.0, t2.im / 2.0, t3.im / 2.0]
}

pub fn from_su2_coords(v: [f64; 3]) -> Mat2 {
    (sigma1() * c(v[0], 0.0) + sigma2() * c(v[1], 0.0) + sigma3() * c(v[2], 0.0)) * I
}

/// `exp(X)` for traceless `X`, using `X² = -det(X)·1`.
pub fn exp_traceless(x: &Mat2) -> Mat2 {
    let s2 = -x.determinant();
    let s = s2.sqrt();
    let (ch, sh_over_s) = if s.norm() < 1e-4 {
        // Taylor series in s², accurate to ~1e-20 here.
        let ch = C64::new(1.0, 0.0) + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0;
        let sh = C64::new(1.0, 0.0) + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0;
        (ch, sh)
    } else {
        (s.cosh(), s.sinh() / s)
    };
    Mat2::identity() * ch + x * sh_over_s
}

/// A random element of su(2) with unit Frobenius norm.
pub fn random_unit_su2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    loop {
        let v: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            // |i a·σ|_F = sqrt(2)|a|
            let s = 1.0 / (n * 2f64.sqrt());
            return from_su2_coords([v[0] * s, v[1] * s, v[2] * s]);
        }
    }
}

/// An element of SU(2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[[f64; 2]; 4]", try_from = "[[f64; 2]; 4]")]
pub struct Su2Element(Mat2);

impl Su2Element {
    pub fn identity() -> Self {
        Su2Element(Mat2::identity())
    }

    /// Nearest SU(2) matrix in the quaternion parameterization
    /// `[[p, q], [-q̄, p̄]]`.
    pub fn renormalize(m: &Mat2) -> Self {
        let p = (m[(0, 0)] + m[(1, 1)].conj()) * 0.5;
        let q = (m[(0, 1)] - m[(1, 0)].conj()) * 0.5;
        let n = (p.norm_sqr() + q.norm_sqr()).sqrt();
        let (p, q) = if n > 0.0 { (p / n, q / n) } else { (c(1.0, 0.0), c(0.0, 0.0)) };
        Su2Element(Mat2::new(p, q, -q.conj(), p.conj()))
    }

    pub fn exp(x: &Mat2) -> Self {
        Self::renormalize(&exp_traceless(x))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Su2Element(self.0.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Su2Element(self.0 * other.0)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Eigenvalue phase `φ ∈ [0, π]` so that the eigenvalues are `e^{±iφ}`.
    pub fn phase(&self) -> f64 {
        (self.trace().re / 2.0).clamp(-1.0, 1.0).acos()
    }

    /// `max(‖M M† − 1‖, |det M − 1|)`.
    pub fn unitarity_defect(&self) -> f64 {
        let u = self.0 * self.0.adjoint() - Mat2::identity();
        frob(&u).max((self.0.determinant() - c(1.0, 0.0)).norm())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        frob(&(self.0 - other.0))
    }
}

impl From<Su2Element> for [[f64; 2]; 4] {
    fn from(g: Su2Element) -> Self {
        let m = g.0;
        [
            [m[(0, 0)].re, m[(0, 0)].im],
            [m[(0, 1)].re, m[(0, 1)].im],
            [m[(1, 0)].re, m[(1, 0)].im],
            [m[(1, 1)].re, m[(1, 1)].im],
        ]
    }
}

impl TryFrom<[[f64; 2]; 4]> for Su2Element {
    type Error = String;
    fn try_from(a: [[f64; 2]; 4]) -> Result<Self, String> {
        let m = Mat2::new(c(a[0][0], a[0][1]), c(a[1][0], a[1][1]), c(a[2][0], a[2][1]), c(a[3][0], a[3][1]));
        let g = Su2Element(m);
        if g.unitarity_defect() > 1e-8 {
            return Err("matrix is not in SU(2)".into());
        }
        Ok(g)
    }
}
