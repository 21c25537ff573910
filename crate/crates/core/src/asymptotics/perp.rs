//! Splitting `End(E)`-valued fields on a torus into `ker ∇_Γ` and its complement.
//!
//! `Γ = i·diag(1, −1)(λ₁ dx + λ₂ dy)` acts on the entries of a field
//! `u = Σ u_k e^{ik·x}`: diagonal entries see `∇ = d`, entry `(0,1)` sees
//! `d + 2iλ` and entry `(1,0)` sees `d − 2iλ`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::TorusSpec;
use crate::su2::{inner, Mat2};

/// Samples of a matrix field on a uniform periodic `n_x × n_y` grid,
/// row-major in `(ix, iy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSection {
    pub torus: TorusSpec,
    pub n_x: usize,
    pub n_y: usize,
    pub values: Vec<Mat2>,
}

impl TorusSection {
    pub fn new(torus: TorusSpec, n_x: usize, n_y: usize, values: Vec<Mat2>) -> Result<Self> {
        if n_x == 0 || n_y == 0 || values.len() != n_x * n_y {
            return Err(Error::DomainMismatch(format!("{} values for a {n_x}x{n_y} grid", values.len())));
        }
        Ok(TorusSection { torus, n_x, n_y, values })
    }

    pub fn from_fn(torus: TorusSpec, n_x: usize, n_y: usize, f: impl Fn(f64, f64) -> Mat2) -> Self {
        let mut values = Vec::with_capacity(n_x * n_y);
        for i in 0..n_x {
            for j in 0..n_y {
                values.push(f(torus.period_x * i as f64 / n_x as f64, torus.period_y * j as f64 / n_y as f64));
            }
        }
        TorusSection { torus, n_x, n_y, values }
    }

    /// `∫_T Re tr(a† b)` by the trapezoid rule.
    pub fn l2_inner(&self, other: &TorusSection) -> f64 {
        let cell = self.torus.area() / (self.n_x * self.n_y) as f64;
        self.values.iter().zip(&other.values).map(|(a, b)| inner(a, b)).sum::<f64>() * cell
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_inner(self).sqrt()
    }

    fn wave(&self, k: [i64; 2], i: usize, j: usize) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * (k[0] as f64 * i as f64 / self.n_x as f64 + k[1] as f64 * j as f64 / self.n_y as f64))
    }

    /// Discrete Fourier coefficient of entry `(a, b)` at integer mode `k`.
    fn coefficient(&self, a: usize, b: usize, k: [i64; 2]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..self.n_x {
            for j in 0..self.n_y {
                s += self.values[i * self.n_y + j][(a, b)] * self.wave(k, i, j).conj();
            }
        }
        s / (self.n_x * self.n_y) as f64
    }
}

/// Integer mode `(n, m)` with `2π(n/L_x, m/L_y) = v`, if there is one.
fn integer_mode(v: [f64; 2], torus: &TorusSpec) -> Option<[i64; 2]> {
    let n = v[0] * torus.period_x / (2.0 * PI);
    let m = v[1] * torus.period_y / (2.0 * PI);
    let (rn, rm) = (n.round(), m.round());
    ((n - rn).abs() < 1e-9 && (m - rm).abs() < 1e-9).then_some([rn as i64, rm as i64])
}

/// `(u_Γ, u_⊥)` with `u_Γ` the L²-projection of `section` onto `ker ∇_Γ`:
/// constant diagonal part, plus the off-diagonal modes annihilated by `d ± 2iλ`.
/// For trivial `Γ` all constant entries lie in the kernel.
pub fn perp_decompose(section: &TorusSection, lambda: [f64; 2]) -> (TorusSection, TorusSection) {
    let t = section.torus;
    let mut kernel = vec![Mat2::zeros(); section.values.len()];
    // entry (a, b) lies in the kernel for mode k with k = −(s_a − s_b)λ, s = (1, −1)
    let entries = [(0usize, 0usize, 0.0), (1, 1, 0.0), (0, 1, 2.0), (1, 0, -2.0)];
    for (a, b, s) in entries {
        if let Some(k) = integer_mode([-s * lambda[0], -s * lambda[1]], &t) {
            if k[0].unsigned_abs() as usize * 2 >= section.n_x || k[1].unsigned_abs() as usize * 2 >= section.n_y {
                continue;
            }
            let c = section.coefficient(a, b, k);
            for i in 0..section.n_x {
                for j in 0..section.n_y {
                    kernel[i * section.n_y + j][(a, b)] += c * section.wave(k, i, j);
                }
            }
        }
    }
    let perp = section.values.iter().zip(&kernel).map(|(u, k)| u - k).collect();
    (
        TorusSection { values: kernel, ..section.clone() },
        TorusSection { values: perp, ..section.clone() },
    )
}

/// Smallest eigenvalue of `∇_Γ*∇_Γ` on `(ker ∇_Γ)^⊥`, over modes `|n|, |m| ≤ cutoff`.
pub fn poincare_constant(lambda: [f64; 2], torus: &TorusSpec, cutoff: usize) -> Result<f64> {
    if cutoff < 4 {
        return Err(Error::InvalidParameter(format!("mode cutoff must be at least 4, got {cutoff}")));
    }
    let n = cutoff as i64;
    let mut best = f64::INFINITY;
    for i in -n..=n {
        for j in -n..=n {
            let k = [2.0 * PI * i as f64 / torus.period_x, 2.0 * PI * j as f64 / torus.period_y];
            for s in [0.0, 2.0, -2.0] {
                let e = (k[0] + s * lambda[0]).powi(2) + (k[1] + s * lambda[1]).powi(2);
                if e > 1e-12 {
                    best = best.min(e);
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::xi_to_lambda;
    use crate::su2::{c, diag_i, sigma1};
    use proptest::prelude::*;

    fn t() -> TorusSpec {
        TorusSpec::default()
    }

    #[test]
    fn constant_diagonal_is_kernel() {
        let lam = xi_to_lambda([0.25, 0.1], &t());
        let s = TorusSection::from_fn(t(), 8, 8, |_, _| diag_i(0.7));
        let (k, p) = perp_decompose(&s, lam);
        assert!(p.l2_norm() < 1e-12 && (k.l2_norm() - s.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn off_diagonal_wave_is_perp() {
        let lam = xi_to_lambda([0.25, 0.1], &t());
        let s = TorusSection::from_fn(t(), 8, 8, |x, _| {
            let e = C64::from_polar(1.0, x);
            Mat2::new(c(0.0, 0.0), e, -e.conj(), c(0.0, 0.0))
        });
        let (k, p) = perp_decompose(&s, lam);
        assert!(k.l2_norm() < 1e-12 && (p.l2_norm() - s.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn trivial_flat_limit_keeps_constants() {
        let s = TorusSection::from_fn(t(), 6, 6, |x, _| sigma1() * c(0.0, 1.0) + diag_i(x.cos()));
        let (k, p) = perp_decompose(&s, [0.0, 0.0]);
        assert!((k.values[0] - sigma1() * c(0.0, 1.0)).norm() < 1e-12);
        assert!(k.l2_inner(&p).abs() < 1e-10);
    }

    #[test]
    fn half_period_shift_puts_a_wave_in_the_kernel() {
        // ξ₀ = (½, 0): d + 2iλ kills e^{-ix} in entry (0, 1)
        let lam = xi_to_lambda([0.5, 0.0], &t());
        let s = TorusSection::from_fn(t(), 8, 8, |x, _| {
            let e = C64::from_polar(1.0, -x);
            Mat2::new(c(0.0, 0.0), e, -e.conj(), c(0.0, 0.0))
        });
        let (_, p) = perp_decompose(&s, lam);
        assert!(p.l2_norm() < 1e-12);
    }

    #[test]
    fn poincare_examples() {
        assert_eq!(poincare_constant([0.0, 0.0], &t(), 8).unwrap(), 1.0);
        let c1 = poincare_constant(xi_to_lambda([0.25, 0.0], &t()), &t(), 8).unwrap();
        assert!((c1 - 0.25).abs() < 1e-12);
        let c2 = poincare_constant(xi_to_lambda([0.5, 0.0], &t()), &t(), 8).unwrap();
        assert!((c2 - 1.0).abs() < 1e-12);
        assert!(poincare_constant([0.0, 0.0], &t(), 3).is_err());
    }

    fn random_section(seed: u64) -> TorusSection {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..64).map(|_| crate::su2::random_unit_su2(&mut rng) * c(rng.gen_range(-1.0..1.0), 0.0)).collect();
        TorusSection::new(t(), 8, 8, vals).unwrap()
    }

    proptest! {
        #[test]
        fn decomposition_is_an_orthogonal_projection(seed in 0u64..1000, x1 in 0.0f64..1.0, x2 in 0.0f64..1.0) {
            let s = random_section(seed);
            let lam = xi_to_lambda([x1, x2], &t());
            let (k, p) = perp_decompose(&s, lam);
            prop_assert!(k.l2_inner(&p).abs() <= 1e-10);
            let (kk, pk) = perp_decompose(&k, lam);
            prop_assert!(pk.l2_norm() <= 1e-12);
            prop_assert!(kk.values.iter().zip(&k.values).all(|(a, b)| (a - b).norm() <= 1e-12));
        }

        #[test]
        fn poincare_is_nonincreasing_in_cutoff(x1 in 0.0f64..1.0, x2 in 0.0f64..1.0) {
            let lam = xi_to_lambda([x1, x2], &t());
            let mut prev = f64::INFINITY;
            for n in 4..12 {
                let c = poincare_constant(lam, &t(), n).unwrap();
                prop_assert!(c > 0.0 && c <= prev);
                prev = c;
            }
            prop_assert_eq!(poincare_constant(lam, &t(), 8).unwrap(), poincare_constant(lam, &t(), 11).unwrap());
        }
    }
}
