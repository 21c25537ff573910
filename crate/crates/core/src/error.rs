use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point r = {r} outside domain [{r_min}, {r_max}]")]
    OutsideDomain { r: f64, r_min: f64, r_max: f64 },

    #[error("degenerate finite-difference step {0}")]
    DegenerateStep(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("torus invariance violated: max deviation {max_deviation:e} > {tolerance:e}")]
    NotTorusInvariant { max_deviation: f64, tolerance: f64 },

    #[error("evaluation at the pole w = 0")]
    AtPole,

    #[error("monodromy drift {drift:e} exceeds threshold {threshold:e}")]
    NonConverging { drift: f64, threshold: f64 },

    #[error("branch selection ambiguous: {0}")]
    BranchAmbiguous(String),

    #[error("fit residual {residual:e} exceeds threshold {threshold:e}")]
    FitResidual { residual: f64, threshold: f64 },

    #[error("curvature tail does not decay fast enough (fitted exponent {gamma})")]
    DivergentTail { gamma: f64 },

    #[error("dual-torus point coincides with a singular point")]
    SingularPoint,

    #[error("extrapolation did not converge: last estimates {estimates:?}")]
    NoConvergence { estimates: Vec<(f64, f64)> },

    #[error("boundary condition violated: {0}")]
    BoundaryCondition(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}
