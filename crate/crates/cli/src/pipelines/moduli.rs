use ipl_core::moduli::{
    apply_complex_structure, instanton_tangent_residual, k1_chart, l2_metric_higgs, l2_metric_instanton, moduli_dimension, quaternion_check,
    translation_deformation, DualGrid, InstantonGrid, TangentVectorHiggs, TangentVectorInstanton, Translation,
};
use ipl_core::models::{model_connection, ModelParams};
use ipl_core::spectral::nahm_weights;
use ipl_core::su2::from_su2_coords;
use ipl_core::{AnnulusGrid, RadialSpacing, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{domain, max, min, rng, PipelineResult};
use crate::config::{c, ExperimentConfig, ModuliConfig};
use crate::report::{num, Check, Table};

pub fn run(cfg: &ExperimentConfig, out: &mut PipelineResult) {
    let mc = cfg.moduli.clone().unwrap_or_default();

    let q = quaternion_check();
    out.check(Check::equal("quaternion_relations", q.holds() as u8 as f64, 1.0).detail(format!(
        "I1 I2 = {} I3, I1 I2 I3 = {} Id, max |I^2 + Id| = {}",
        q.product_sign, q.triple_sign, q.square_defect
    )));

    let mut r = rng(cfg, 21);
    let mut unbalanced = 0usize;
    for _ in 0..mc.alpha_samples {
        match nahm_weights(r.gen_range(-0.5..0.5)) {
            Ok(w) => unbalanced += (!w.balanced) as usize,
            Err(e) => out.check(Check::errored("nahm_weights", e)),
        }
    }
    out.check(Check::equal("parabolic_weight_imbalances", unbalanced as f64, 0.0).detail(format!("{} alpha samples, exact rationals", mc.alpha_samples)));

    out.guard("k1_chart", |out| {
        let dim = moduli_dimension(1)?;
        let chart = k1_chart(c(mc.chart[0]), c(mc.chart[1]))?;
        out.check(Check::equal("moduli_dimension_k1", dim as f64, 4.0));
        out.check(Check::equal("k1_chart_real_dimension", chart.total_real_dim as f64, dim as f64).detail(format!(
            "fiber {} + base {}",
            chart.fiber_real_dim, chart.base_real_dim
        )));
        // the chart meets its constraints f(0) = f0, f'(0) = f0' for every admissible c
        let mut err: f64 = 0.0;
        for k in 0..8 {
            let cc = C64::from_polar(0.3 + 0.2 * k as f64, 0.7 * k as f64);
            if chart.excluded_c.is_some_and(|x| (x - cc).norm() < 1e-6) {
                continue;
            }
            let h = 1e-4;
            let f = |w: C64| chart.eval(cc, w);
            let d = (f(C64::new(h, 0.0))? - f(C64::new(-h, 0.0))?) / (2.0 * h);
            err = err.max((f(C64::new(0.0, 0.0))? - chart.f0).norm()).max((d - chart.df0).norm());
        }
        out.check(Check::at_most("k1_chart_constraint_error", err, 1e-6));
        Ok(())
    });

    metric_suite(cfg, &mc, &mut r, out);
    translation_suite(cfg, &mc, out);
}

fn random_instanton(dom: &InstantonGrid, r: &mut ChaCha8Rng) -> TangentVectorInstanton {
    let values = (0..dom.len()).map(|_| std::array::from_fn(|_| from_su2_coords([r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]))).collect();
    TangentVectorInstanton { domain: dom.clone(), values }
}

fn random_higgs(grid: DualGrid, rank: usize, r: &mut ChaCha8Rng) -> TangentVectorHiggs {
    let mut m = || DMatrix::from_fn(rank, rank, |_, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
    let mut t = TangentVectorHiggs::zeros(grid, rank);
    for i in 0..grid.len() {
        t.b[i] = [m(), m()];
        t.phi[i] = m();
    }
    t
}

fn metric_suite(cfg: &ExperimentConfig, mc: &ModuliConfig, r: &mut ChaCha8Rng, out: &mut PipelineResult) {
    out.guard("l2_metric", |out| {
        let grid = AnnulusGrid::new(3.0, 4.0, 9, 4, 4, 4, RadialSpacing::Uniform)?;
        let dom = InstantonGrid::new(grid, cfg.torus)?;
        let dual = DualGrid::new(6, 6)?;
        let (mut sym, mut lin, mut iso) = (Vec::new(), Vec::new(), Vec::new());
        let mut pos = Vec::new();
        for _ in 0..mc.metric_samples {
            let (a, b) = (random_instanton(&dom, r), random_instanton(&dom, r));
            let gab = l2_metric_instanton(&a, &b)?;
            let gaa = l2_metric_instanton(&a, &a)?;
            sym.push((gab - l2_metric_instanton(&b, &a)?).abs() / gab.abs().max(1.0));
            pos.push(gaa);
            let s: f64 = r.gen_range(-2.0..2.0);
            let combo = TangentVectorInstanton {
                domain: dom.clone(),
                values: a.values.iter().zip(&b.values).map(|(x, y)| std::array::from_fn(|m| x[m] + y[m] * C64::new(s, 0.0))).collect(),
            };
            lin.push((l2_metric_instanton(&combo, &a)? - gaa - s * gab).abs() / (gaa + gab.abs()));
            for j in 1..=3 {
                let ia = apply_complex_structure(j, &a)?;
                iso.push((l2_metric_instanton(&ia, &ia)? - gaa).abs() / gaa);
                // g(I a, a) = 0 for a compatible metric
                iso.push(l2_metric_instanton(&ia, &a)?.abs() / gaa);
            }

            let rank = 2;
            let (u, v) = (random_higgs(dual, rank, r), random_higgs(dual, rank, r));
            let guv = l2_metric_higgs(&u, &v)?;
            sym.push((guv - l2_metric_higgs(&v, &u)?).abs() / guv.abs().max(1.0));
            pos.push(l2_metric_higgs(&u, &u)?);
        }
        out.check(Check::at_most("l2_metric_symmetry", max(sym), 1e-12).detail(format!("{} instanton and Higgs pairs", mc.metric_samples)));
        out.check(Check::at_least("l2_metric_positivity_min", min(pos), f64::MIN_POSITIVE));
        out.check(Check::at_most("l2_metric_bilinearity", max(lin), 1e-10));
        out.check(Check::at_most("complex_structure_isometry", max(iso), 1e-10).detail("|g(Ia, Ia) - g(a, a)| and |g(Ia, a)| relative to g(a, a)"));
        Ok(())
    });
}

fn translation_suite(cfg: &ExperimentConfig, mc: &ModuliConfig, out: &mut PipelineResult) {
    out.guard("translation_tangents", |out| {
        let p = ModelParams::semisimple(C64::new(0.1, 0.2), C64::new(1.0, -0.5), 0.25)?;
        let conn = model_connection(&p, &domain(cfg))?;
        let grid = AnnulusGrid::new(8.0, 12.0, mc.tangent_grid[0], mc.tangent_grid[1], 4, 4, RadialSpacing::Uniform)?;
        let dom = InstantonGrid::new(grid, cfg.torus)?;
        let dirs = [Translation::X, Translation::Y, Translation::W1, Translation::W2];
        let mut tangents = Vec::new();
        let mut residual: f64 = 0.0;
        for d in dirs {
            let a = translation_deformation(conn.as_ref(), &dom, d)?;
            let (star, plus) = instanton_tangent_residual(conn.as_ref(), &a)?;
            residual = residual.max(star).max(plus);
            tangents.push(a);
        }
        out.check(Check::at_most("translation_tangent_residual", residual, mc.tangent_tolerance).detail("d_A* a and d_A+ a on the interior"));
        let mut gram = DMatrix::<f64>::zeros(4, 4);
        let mut table = Table::new("gram.csv", &["i", "j", "g"]);
        for i in 0..4 {
            for j in 0..4 {
                gram[(i, j)] = l2_metric_instanton(&tangents[i], &tangents[j])?;
                table.push(vec![format!("{:?}", dirs[i]), format!("{:?}", dirs[j]), num(gram[(i, j)])]);
            }
        }
        let asym = (&gram - gram.transpose()).abs().max() / gram.abs().max();
        let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
        out.check(Check::at_most("translation_gram_asymmetry", asym, 1e-12));
        out.check(Check::at_least("translation_gram_min_eigenvalue", eig.min() / gram.abs().max(), -1e-12).detail("relative to the largest entry"));
        out.tables.push(table);
        Ok(())
    });
}
