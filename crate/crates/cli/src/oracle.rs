//! Brute-force oracles that the pipelines compare the core routines against.

use std::f64::consts::PI;

use ipl_core::geometry::dual_lattice;
use ipl_core::{TorusSpec, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Jumping points of `ζ(w) = λ + μ/w` for the twist `ζ_ξ`: every lattice
/// translate in a `(2·half_width + 1)²` box and both signs, solved in closed
/// form. Returns `(w, sign)` sorted by sign, then `Re w`, then `Im w`.
pub fn jumping_scan(lambda: C64, mu: C64, zeta_xi: C64, torus: &TorusSpec, r_lo: f64, r_hi: f64, half_width: i64) -> Vec<(C64, i8)> {
    let [g1, g2] = dual_lattice(torus);
    let mut out = Vec::new();
    if mu.norm() == 0.0 {
        return out;
    }
    for s in [1i8, -1] {
        for a in -half_width..=half_width {
            for b in -half_width..=half_width {
                let d = zeta_xi * s as f64 + g1 * a as f64 + g2 * b as f64 - lambda;
                if d.norm() == 0.0 {
                    continue;
                }
                let w = mu / d;
                if w.norm() >= r_lo && w.norm() <= r_hi {
                    out.push((w, s));
                }
            }
        }
    }
    out.sort_by(|p, q| q.1.cmp(&p.1).then(p.0.re.total_cmp(&q.0.re)).then(p.0.im.total_cmp(&q.0.im)));
    out
}

/// Smallest nonzero Rayleigh quotient of `∇_Γ*∇_Γ` over the span of random
/// trigonometric polynomials (modes `|n|, |m| ≤ 3`), one span per entry type
/// `∂ + isλ`, `s ∈ {0, 2, −2}`. Derivatives are link-variable forward
/// differences on a `grid × grid` mesh, so the quotient converges to the
/// continuum value at rate `O(h²)`.
pub fn poincare_rayleigh(lambda: [f64; 2], torus: &TorusSpec, grid: usize, polynomials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = [torus.period_x / grid as f64, torus.period_y / grid as f64];
    let k = [2.0 * PI / torus.period_x, 2.0 * PI / torus.period_y];
    let mut best = f64::INFINITY;
    for s in [0.0, 2.0, -2.0] {
        let links = [C64::from_polar(1.0, s * lambda[0] * h[0]), C64::from_polar(1.0, s * lambda[1] * h[1])];
        let mut values = Vec::with_capacity(polynomials);
        let mut grads = Vec::with_capacity(polynomials);
        for _ in 0..polynomials {
            let coef: Vec<((i32, i32), C64)> = (-3..=3)
                .flat_map(|n| (-3..=3).map(move |m| (n, m)))
                .map(|nm| (nm, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            let u: Vec<C64> = (0..grid * grid)
                .map(|idx| {
                    let (x, y) = ((idx / grid) as f64 * h[0], (idx % grid) as f64 * h[1]);
                    coef.iter().map(|&((n, m), c)| c * C64::from_polar(1.0, n as f64 * k[0] * x + m as f64 * k[1] * y)).sum()
                })
                .collect();
            let at = |i: usize, j: usize| u[(i % grid) * grid + (j % grid)];
            let mut du = Vec::with_capacity(2 * grid * grid);
            for i in 0..grid {
                for j in 0..grid {
                    du.push((links[0] * at(i + 1, j) - at(i, j)) / h[0]);
                    du.push((links[1] * at(i, j + 1) - at(i, j)) / h[1]);
                }
            }
            values.push(u);
            grads.push(du);
        }
        let gram = |v: &[Vec<C64>]| {
            DMatrix::from_fn(v.len(), v.len(), |i, j| v[i].iter().zip(&v[j]).map(|(a, b)| a.conj() * b).sum::<C64>())
        };
        if let Some(e) = smallest_nonzero_generalized(&gram(&grads), &gram(&values)) {
            best = best.min(e);
        }
    }
    best
}

/// Real symmetric embedding `[[Re, −Im], [Im, Re]]` of a Hermitian matrix;
/// every eigenvalue appears twice.
fn real_embedding(m: &DMatrix<C64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Smallest eigenvalue above the kernel of `a v = e b v` restricted to the
/// range of `b`.
fn smallest_nonzero_generalized(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Option<f64> {
    let (a, b) = (real_embedding(a), real_embedding(b));
    let eb = SymmetricEigen::new(b);
    let top = eb.eigenvalues.max();
    let keep: Vec<usize> = (0..eb.eigenvalues.len()).filter(|&i| eb.eigenvalues[i] > 1e-10 * top).collect();
    // C = V Λ^{-1/2} on the range of b, so that CᵀbC = Id
    let c = DMatrix::from_fn(a.nrows(), keep.len(), |r, j| eb.eigenvectors[(r, keep[j])] / eb.eigenvalues[keep[j]].sqrt());
    let reduced = c.transpose() * a * &c;
    SymmetricEigen::new(reduced).eigenvalues.iter().cloned().filter(|&v| v > 1e-9).reduce(f64::min)
}
