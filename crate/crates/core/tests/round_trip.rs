use ipl_core::asymptotics::{canonicalize, extract, ExtractionOptions};
use ipl_core::geometry::lattice_distance;
use ipl_core::models::{model_connection, perturb, ModelDomain, ModelParams};
use ipl_core::{TorusSpec, C64};

fn grid() -> Vec<ModelParams> {
    let ls = [C64::new(0.0, 0.0), C64::new(0.1, 0.2), C64::new(-0.15, 0.05)];
    let ms = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, -1.0)];
    let mut v = vec![];
    for l in ls {
        for m in ms {
            for a in [0.0, 0.25, -0.4] {
                v.push(ModelParams::semisimple(l, m, a).unwrap());
            }
        }
    }
    v
}

/// `(|Δλ| mod lattice, |Δα|, |Δμ|)` after canonicalizing the inputs.
fn errors(p: &ModelParams, opts: &ExtractionOptions, seed: Option<u64>) -> (f64, f64, f64) {
    let t = TorusSpec::default();
    let mut conn = model_connection(p, &ModelDomain::default()).unwrap();
    if let Some(s) = seed {
        conn = perturb(conn, 0.5, 0.05, s).unwrap();
    }
    let got = extract(conn.as_ref(), opts).unwrap();
    let (xi, a, m) = canonicalize(&p.xi0(&t), p.alpha, p.mu, &t);
    // ζ = iλ, so the ζ lattice distance is the λ distance
    (lattice_distance(got.xi0.zeta - xi.zeta, &t), (got.alpha - a).abs(), (got.mu - m).norm())
}

#[test]
fn exact_models_round_trip() {
    let opts = ExtractionOptions { instanton: false, ..Default::default() };
    for p in grid() {
        let (l, a, m) = errors(&p, &opts, None);
        assert!(l <= 1e-4 && a <= 1e-6 && m <= 1e-4, "{p:?}: {l:e} {a:e} {m:e}");
    }
}

#[test]
fn perturbed_models_round_trip() {
    let opts = ExtractionOptions { instanton: false, ..ExtractionOptions::with_rings(&[1e4, 2e4, 4e4, 8e4]) };
    for (i, p) in grid().into_iter().enumerate() {
        let (l, a, m) = errors(&p, &opts, Some(100 + i as u64));
        assert!(l <= 1e-2 && a <= 1e-3 && m <= 1e-2, "{p:?}: {l:e} {a:e} {m:e}");
    }
}
