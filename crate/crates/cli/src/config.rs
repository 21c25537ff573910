//! Experiment configuration: one JSON document per invocation.
//!
//! Every section is optional and falls back to the defaults below; unknown
//! keys anywhere are schema violations.

use std::f64::consts::E;

use ipl_core::models::{ModelKind, ModelParams};
use ipl_core::{TorusSpec, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub torus: TorusSpec,
    /// Radial cutoff of the model domains.
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    /// A single model; takes precedence over `models`.
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub models: Option<ModelGrid>,
    #[serde(default)]
    pub residuals: Option<ResidualsConfig>,
    #[serde(default)]
    pub decay: Option<DecayConfig>,
    #[serde(default)]
    pub inequalities: Option<InequalitiesConfig>,
    #[serde(default)]
    pub extraction: Option<ExtractionConfig>,
    #[serde(default)]
    pub spectral: Option<SpectralConfig>,
    #[serde(default)]
    pub stability: Option<StabilityConfig>,
    #[serde(default)]
    pub moduli: Option<ModuliConfig>,
}

fn default_r_min() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "semisimple")]
    pub kind: ModelKind,
    #[serde(default)]
    pub lambda: [f64; 2],
    #[serde(default)]
    pub mu: [f64; 2],
    #[serde(default)]
    pub alpha: f64,
}

fn semisimple() -> ModelKind {
    ModelKind::Semisimple
}

impl ModelSpec {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let p = match self.kind {
            ModelKind::Semisimple => ModelParams::semisimple(c(self.lambda), c(self.mu), self.alpha),
            ModelKind::Nilpotent => {
                let p = ModelParams { kind: ModelKind::Nilpotent, lambda: c(self.lambda), mu: c(self.mu), alpha: self.alpha };
                p.validate().map(|_| p)
            }
        };
        p.map_err(|e| CliError::Schema(format!("model: {e}")))
    }
}

pub fn c(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

/// Cartesian product of semisimple parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelGrid {
    pub lambda: Vec<[f64; 2]>,
    pub mu: Vec<[f64; 2]>,
    pub alpha: Vec<f64>,
}

impl Default for ModelGrid {
    fn default() -> Self {
        ModelGrid {
            lambda: vec![[0.0, 0.0], [0.1, 0.2], [-0.15, 0.05]],
            mu: vec![[0.0, 0.0], [1.0, 0.0], [2.0, -1.0]],
            alpha: vec![0.0, 0.25, -0.4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualsConfig {
    pub samples: usize,
    pub r_range: [f64; 2],
    pub tolerance: f64,
    /// Nilpotent-model checks; unset means on unless a single `model` is given.
    pub nilpotent: Option<bool>,
    pub nilpotent_r_range: [f64; 2],
    pub nilpotent_tolerance: f64,
}

impl Default for ResidualsConfig {
    fn default() -> Self {
        ResidualsConfig {
            samples: 1000,
            r_range: [5.0, 500.0],
            tolerance: 1e-8,
            nilpotent: None,
            nilpotent_r_range: [10.0, 1000.0],
            nilpotent_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub rings: usize,
    pub r_range: [f64; 2],
    pub exponent: f64,
    pub tolerance: f64,
    /// Nilpotent-model checks; unset means on unless a single `model` is given.
    pub nilpotent: Option<bool>,
    pub nilpotent_r_range: [f64; 2],
    pub log_power: f64,
    pub log_power_tolerance: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            rings: 8,
            r_range: [10.0, 1000.0],
            exponent: -2.0,
            tolerance: 0.05,
            nilpotent: None,
            nilpotent_r_range: [E * E, E.powi(6)],
            log_power: -2.0,
            log_power_tolerance: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InequalitiesConfig {
    pub gap_samples: usize,
    pub drift_tolerance: f64,
    pub drift_samples: usize,
    pub drift_steps: usize,
    pub weitzenbock_fixtures: usize,
    pub weitzenbock_tolerance: f64,
    pub poincare_samples: usize,
    pub poincare_relative_tolerance: f64,
    pub oracle_grid: usize,
    pub oracle_polynomials: usize,
}

impl Default for InequalitiesConfig {
    fn default() -> Self {
        InequalitiesConfig {
            gap_samples: 10_000,
            drift_tolerance: 1e-3,
            drift_samples: 5,
            drift_steps: 64,
            weitzenbock_fixtures: 20,
            weitzenbock_tolerance: 1e-6,
            poincare_samples: 20,
            poincare_relative_tolerance: 0.01,
            oracle_grid: 32,
            oracle_polynomials: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractionConfig {
    pub rings: Vec<f64>,
    /// `(λ, α, μ)`.
    pub tolerances: [f64; 3],
    pub perturbed: Option<PerturbedConfig>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig { rings: vec![20.0, 40.0, 80.0, 160.0], tolerances: [1e-4, 1e-6, 1e-4], perturbed: Some(PerturbedConfig::default()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbedConfig {
    pub amplitude: f64,
    /// Decay `r^{−(1+δ)}`.
    pub delta: f64,
    pub rings: Vec<f64>,
    pub tolerances: [f64; 3],
}

impl Default for PerturbedConfig {
    fn default() -> Self {
        PerturbedConfig { amplitude: 0.05, delta: 0.5, rings: vec![1e4, 2e4, 4e4, 8e4], tolerances: [1e-2, 1e-3, 1e-2] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub correspondence: Option<CorrespondenceConfig>,
    pub dichotomy: Option<DichotomyConfig>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { correspondence: Some(CorrespondenceConfig::default()), dichotomy: Some(DichotomyConfig::default()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrespondenceConfig {
    /// Twist `ζ₀` of the asymptotic state.
    pub zeta0: [f64; 2],
    pub r_lo: f64,
    pub r_hi: f64,
    pub mu_samples: usize,
    pub mu_abs: [f64; 2],
    pub xi_per_mu: usize,
    pub residue_tolerance: f64,
    pub approach_steps: usize,
}

impl Default for CorrespondenceConfig {
    fn default() -> Self {
        CorrespondenceConfig {
            zeta0: [-0.05, 0.1],
            r_lo: 20.0,
            r_hi: 1e4,
            mu_samples: 10,
            mu_abs: [0.5, 2.0],
            xi_per_mu: 10,
            residue_tolerance: 1e-8,
            approach_steps: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DichotomyConfig {
    pub zeta0: [f64; 2],
    pub mu: Vec<[f64; 2]>,
    /// Model domain `|w| ≥ r_min_factor·|μ|`.
    pub r_min_factor: f64,
    pub steps: usize,
    pub zero_mu_samples: usize,
    pub zero_mu_annulus: f64,
    pub separation: f64,
    /// Largest `|c|` of the `c/w²` tail in the `μ = 0` samples.
    pub zero_mu_tail_max: f64,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        DichotomyConfig {
            zeta0: [-0.05, 0.1],
            mu: vec![[1.0, 0.0], [0.5, -0.5], [-1.5, 0.8]],
            r_min_factor: 8.0,
            steps: 10,
            zero_mu_samples: 100,
            zero_mu_annulus: 5.0,
            separation: 0.05,
            zero_mu_tail_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityConfig {
    pub b: Vec<i64>,
    pub alpha: Vec<f64>,
    pub k_max: u32,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig { b: vec![1, 2, 3, 4, 5], alpha: vec![-0.4, -0.2, 0.0, 0.2, 0.4], k_max: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModuliConfig {
    pub alpha_samples: usize,
    pub metric_samples: usize,
    /// `(f(0), f′(0))` for the `k = 1` chart.
    pub chart: [[f64; 2]; 2],
    /// Tangent-family grid: `[n_r, n_θ]` on `r ∈ [8, 12]`.
    pub tangent_grid: [usize; 2],
    pub tangent_tolerance: f64,
}

impl Default for ModuliConfig {
    fn default() -> Self {
        ModuliConfig { alpha_samples: 100, metric_samples: 100, chart: [[0.0, 0.0], [1.0, 0.0]], tangent_grid: [41, 64], tangent_tolerance: 1e-4 }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Schema(format!("{name} must be positive and finite, got {v}")))
    }
}

fn range(name: &str, r: [f64; 2]) -> Result<(), CliError> {
    positive(name, r[0])?;
    if r[1] > r[0] && r[1].is_finite() {
        Ok(())
    } else {
        Err(CliError::Schema(format!("{name} must be an increasing pair, got {r:?}")))
    }
}

fn count(name: &str, n: usize) -> Result<(), CliError> {
    if n > 0 {
        Ok(())
    } else {
        Err(CliError::Schema(format!("{name} must be at least 1")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!("schema_version must be {SCHEMA_VERSION}, got {}", cfg.schema_version)));
        }
        cfg.torus.validate().map_err(|e| CliError::Schema(e.to_string()))?;
        positive("r_min", cfg.r_min)?;
        if let Some(m) = &cfg.model {
            m.params()?;
        }
        if let Some(g) = &cfg.models {
            if g.lambda.is_empty() || g.mu.is_empty() || g.alpha.is_empty() {
                return Err(CliError::Schema("models grid needs at least one value per axis".into()));
            }
            for a in &g.alpha {
                ModelParams::semisimple(C64::new(0.0, 0.0), C64::new(0.0, 0.0), *a).map_err(|e| CliError::Schema(e.to_string()))?;
            }
        }
        if let Some(r) = &cfg.residuals {
            count("residuals.samples", r.samples)?;
            range("residuals.r_range", r.r_range)?;
            range("residuals.nilpotent_r_range", r.nilpotent_r_range)?;
            positive("residuals.tolerance", r.tolerance)?;
            positive("residuals.nilpotent_tolerance", r.nilpotent_tolerance)?;
        }
        if let Some(d) = &cfg.decay {
            if d.rings < 6 {
                return Err(CliError::Schema("decay.rings must be at least 6".into()));
            }
            range("decay.r_range", d.r_range)?;
            range("decay.nilpotent_r_range", d.nilpotent_r_range)?;
            positive("decay.tolerance", d.tolerance)?;
            positive("decay.log_power_tolerance", d.log_power_tolerance)?;
        }
        if let Some(q) = &cfg.inequalities {
            for (n, v) in [
                ("gap_samples", q.gap_samples),
                ("drift_samples", q.drift_samples),
                ("weitzenbock_fixtures", q.weitzenbock_fixtures),
                ("poincare_samples", q.poincare_samples),
                ("oracle_polynomials", q.oracle_polynomials),
            ] {
                count(&format!("inequalities.{n}"), v)?;
            }
            if q.drift_steps < 16 || q.oracle_grid < 8 {
                return Err(CliError::Schema("inequalities: drift_steps >= 16 and oracle_grid >= 8 required".into()));
            }
            positive("inequalities.drift_tolerance", q.drift_tolerance)?;
            positive("inequalities.weitzenbock_tolerance", q.weitzenbock_tolerance)?;
            positive("inequalities.poincare_relative_tolerance", q.poincare_relative_tolerance)?;
        }
        if let Some(x) = &cfg.extraction {
            check_rings("extraction.rings", &x.rings)?;
            for t in x.tolerances {
                positive("extraction.tolerances", t)?;
            }
            if let Some(p) = &x.perturbed {
                check_rings("extraction.perturbed.rings", &p.rings)?;
                positive("extraction.perturbed.amplitude", p.amplitude)?;
                positive("extraction.perturbed.delta", p.delta)?;
                for t in p.tolerances {
                    positive("extraction.perturbed.tolerances", t)?;
                }
            }
        }
        if let Some(s) = &cfg.spectral {
            if let Some(c) = &s.correspondence {
                range("spectral.correspondence.[r_lo, r_hi]", [c.r_lo, c.r_hi])?;
                range("spectral.correspondence.mu_abs", c.mu_abs)?;
                count("spectral.correspondence.mu_samples", c.mu_samples)?;
                count("spectral.correspondence.xi_per_mu", c.xi_per_mu)?;
                positive("spectral.correspondence.residue_tolerance", c.residue_tolerance)?;
                if c.approach_steps < 3 {
                    return Err(CliError::Schema("spectral.correspondence.approach_steps must be at least 3".into()));
                }
            }
            if let Some(d) = &s.dichotomy {
                if d.mu.iter().any(|m| m[0] == 0.0 && m[1] == 0.0) {
                    return Err(CliError::Schema("spectral.dichotomy.mu lists the nonzero residues only".into()));
                }
                positive("spectral.dichotomy.r_min_factor", d.r_min_factor)?;
                positive("spectral.dichotomy.zero_mu_tail_max", d.zero_mu_tail_max)?;
                positive("spectral.dichotomy.zero_mu_annulus", d.zero_mu_annulus)?;
                positive("spectral.dichotomy.separation", d.separation)?;
                count("spectral.dichotomy.steps", d.steps)?;
            }
        }
        if let Some(s) = &cfg.stability {
            if s.b.is_empty() || s.alpha.is_empty() || s.k_max == 0 {
                return Err(CliError::Schema("stability needs b values, alpha values and k_max >= 1".into()));
            }
            if s.alpha.iter().any(|a| !(-0.5..0.5).contains(a)) {
                return Err(CliError::Schema("stability.alpha values must lie in [-1/2, 1/2)".into()));
            }
        }
        if let Some(m) = &cfg.moduli {
            count("moduli.alpha_samples", m.alpha_samples)?;
            count("moduli.metric_samples", m.metric_samples)?;
            positive("moduli.tangent_tolerance", m.tangent_tolerance)?;
            if m.tangent_grid[0] < 9 || m.tangent_grid[1] < 4 {
                return Err(CliError::Schema("moduli.tangent_grid needs n_r >= 9 and n_theta >= 4".into()));
            }
        }
        Ok(cfg)
    }

    /// The semisimple parameter set for model-wide checks.
    pub fn model_set(&self) -> Result<Vec<ModelParams>, CliError> {
        if let Some(m) = &self.model {
            return Ok(vec![m.params()?]);
        }
        let g = self.models.clone().unwrap_or_default();
        let mut out = Vec::new();
        for l in &g.lambda {
            for m in &g.mu {
                for a in &g.alpha {
                    out.push(ModelParams::semisimple(c(*l), c(*m), *a).map_err(|e| CliError::Schema(e.to_string()))?);
                }
            }
        }
        Ok(out)
    }

    pub fn nilpotent_suite(&self, flag: Option<bool>) -> bool {
        flag.unwrap_or(self.model.is_none())
    }

    pub fn require_seed(&self, what: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Schema(format!("{what} is randomized and needs a seed")))
    }
}

fn check_rings(name: &str, rings: &[f64]) -> Result<(), CliError> {
    if rings.len() < 4 || rings[0] <= 0.0 || rings.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Schema(format!("{name} needs at least four increasing positive radii")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let c = ExperimentConfig::parse(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(c.model_set().unwrap().len(), 27);
        assert_eq!(c.torus, TorusSpec::default());
    }

    #[test]
    fn schema_violations() {
        for bad in [
            r#"{}"#,
            r#"{"schema_version": 2}"#,
            r#"{"schema_version": 1, "bogus": 0}"#,
            r#"{"schema_version": 1, "residuals": {"tolerance": -1}}"#,
            r#"{"schema_version": 1, "decay": {"rings": 3}}"#,
            r#"{"schema_version": 1, "model": {"alpha": 0.5}}"#,
            r#"{"schema_version": 1, "stability": {"alpha": [0.7]}}"#,
            "not json",
        ] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(CliError::Schema(_))), "{bad}");
        }
    }

    #[test]
    fn single_model_overrides_grid() {
        let c = ExperimentConfig::parse(r#"{"schema_version": 1, "model": {"lambda": [0.1, 0], "mu": [1, 0], "alpha": 0.25}}"#).unwrap();
        let set = c.model_set().unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set[0].alpha, 0.25);
    }
}
