//! Quadrature, least squares, extrapolation and finite differences.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::su2::Mat2;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite Gauss–Legendre rule with `panels` equal panels on `[a, b]`.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// Linear least squares `min ‖A c − b‖₂`; returns coefficients and residual RMS.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let c = svd.solve(b, 1e-13).expect("svd solve");
    let res = a * &c - b;
    let rms = (res.norm_squared() / b.len().max(1) as f64).sqrt();
    (c, rms)
}

/// Straight-line fit `y ≈ c0 + c1 x`; returns `(c0, c1, rms)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let a = DMatrix::from_fn(xs.len(), 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
    let b = DVector::from_column_slice(ys);
    let (c, rms) = lstsq(&a, &b);
    (c[0], c[1], rms)
}

/// Complex least squares with columns `basis` evaluated at each sample.
pub fn complex_lstsq(rows: &[Vec<C64>], rhs: &[C64]) -> (Vec<C64>, f64) {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let a = DMatrix::from_fn(2 * m, 2 * n, |i, j| {
        let z = rows[i / 2][j / 2];
        match (i % 2, j % 2) {
            (0, 0) => z.re,
            (0, 1) => -z.im,
            (1, 0) => z.im,
            _ => z.re,
        }
    });
    let b = DVector::from_fn(2 * m, |i, _| if i % 2 == 0 { rhs[i / 2].re } else { rhs[i / 2].im });
    let (c, _) = lstsq(&a, &b);
    let coeffs: Vec<C64> = (0..n).map(|j| C64::new(c[2 * j], c[2 * j + 1])).collect();
    let mut ss = 0.0;
    for (row, y) in rows.iter().zip(rhs) {
        let pred: C64 = row.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
        ss += (pred - y).norm_sqr();
    }
    (coeffs, (ss / m.max(1) as f64).sqrt())
}

/// Neville extrapolation of `values(h)` to `h = 0` (polynomial in `h`).
/// Returns the diagonal of the tableau; the last entry is the best estimate.
pub fn neville_to_zero(hs: &[f64], values: &[C64]) -> Vec<C64> {
    let n = hs.len();
    let mut p: Vec<C64> = values.to_vec();
    let mut diag = vec![p[n - 1]];
    for k in 1..n {
        for i in (k..n).rev() {
            let hi = hs[i];
            let hik = hs[i - k];
            p[i] = (p[i] * hik - p[i - 1] * hi) / (hik - hi);
        }
        diag.push(p[n - 1]);
    }
    diag
}

/// Linear combinations needed by finite-difference routines.
pub trait Linear: Clone {
    fn lin(&self, a: f64, other: &Self, b: f64) -> Self;
}

impl Linear for f64 {
    fn lin(&self, a: f64, other: &Self, b: f64) -> Self {
        a * self + b * other
    }
}

impl Linear for Mat2 {
    fn lin(&self, a: f64, other: &Self, b: f64) -> Self {
        self * C64::new(a, 0.0) + other * C64::new(b, 0.0)
    }
}

impl<const N: usize> Linear for [Mat2; N] {
    fn lin(&self, a: f64, other: &Self, b: f64) -> Self {
        std::array::from_fn(|i| self[i].lin(a, &other[i], b))
    }
}

impl<T: Linear> Linear for Vec<T> {
    fn lin(&self, a: f64, other: &Self, b: f64) -> Self {
        self.iter().zip(other).map(|(x, y)| x.lin(a, y, b)).collect()
    }
}

/// Fourth-order central difference.
pub fn central4<T: Linear, F: FnMut(f64) -> T>(f: &mut F, x: f64, h: f64) -> T {
    let p1 = f(x + h);
    let m1 = f(x - h);
    let p2 = f(x + 2.0 * h);
    let m2 = f(x - 2.0 * h);
    // (8(p1 - m1) - (p2 - m2)) / 12h
    let d1 = p1.lin(1.0, &m1, -1.0);
    let d2 = p2.lin(1.0, &m2, -1.0);
    d1.lin(8.0 / (12.0 * h), &d2, -1.0 / (12.0 * h))
}

/// Fourth-order central difference with one Richardson step: `(16 D_{h/2} − D_h)/15`.
pub fn richardson_derivative<T: Linear, F: FnMut(f64) -> T>(mut f: F, x: f64, h: f64) -> T {
    let dh = central4(&mut f, x, h);
    let dh2 = central4(&mut f, x, 0.5 * h);
    dh2.lin(16.0 / 15.0, &dh, -1.0 / 15.0)
}

/// Sequential phase unwrapping with period `period`, starting near `reference`.
pub fn unwrap_sequence(values: &[f64], period: f64, reference: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev = reference;
    for &v in values {
        let k = ((prev - v) / period).round();
        let u = v + k * period;
        out.push(u);
        prev = u;
    }
    out
}

/// Value of `v + k·period` nearest to `target`.
pub fn nearest_branch(v: f64, period: f64, target: f64) -> f64 {
    v + ((target - v) / period).round() * period
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [2, 5, 12, 32] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn composite_gauss_of_log() {
        let q: f64 = composite_gauss(1.0, 3.0, 4, 10).iter().map(|(x, w)| w / x).sum();
        assert!((q - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs = [0.1, 0.2, 0.4, 0.8];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let (c0, c1, rms) = linear_fit(&xs, &ys);
        assert!((c0 - 3.0).abs() < 1e-13 && (c1 + 2.0).abs() < 1e-13 && rms < 1e-13);
    }

    #[test]
    fn complex_fit_recovers_coefficients() {
        let ws: Vec<C64> = (0..10).map(|k| C64::from_polar(50.0 + k as f64, 0.3 * k as f64)).collect();
        let (l, m) = (C64::new(0.1, -0.2), C64::new(2.0, -1.0));
        let rows: Vec<Vec<C64>> = ws.iter().map(|w| vec![C64::new(1.0, 0.0), w.inv()]).collect();
        let rhs: Vec<C64> = ws.iter().map(|w| l + m / w).collect();
        let (c, rms) = complex_lstsq(&rows, &rhs);
        assert!((c[0] - l).norm() < 1e-12 && (c[1] - m).norm() < 1e-9 && rms < 1e-13);
    }

    #[test]
    fn neville_recovers_polynomial_limit() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let vals: Vec<C64> = hs.iter().map(|h| C64::new(1.0 + 2.0 * h - h * h, 3.0 * h)).collect();
        let d = neville_to_zero(&hs, &vals);
        assert!((d.last().unwrap() - C64::new(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn richardson_derivative_is_sixth_order() {
        let d = richardson_derivative(|x: f64| x.sin(), 0.7, 0.02);
        assert!((d - 0.7f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn unwrap_follows_continuous_branch() {
        let period = 1.0;
        let vals = [0.9, 0.95, 0.02, 0.07, 0.98];
        let u = unwrap_sequence(&vals, period, 0.9);
        assert!((u[2] - 1.02).abs() < 1e-15 && (u[4] - 0.98).abs() < 1e-15);
    }
}
