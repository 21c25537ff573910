//! Numerical workbench for doubly-periodic SU(2) instantons on `T × ℂ`.
//!
//! Coordinates on `T × ℂ` are `(r, θ, x, y)` with `w = r e^{iθ}` on the plane
//! factor and `(x, y)` periodic on a rectangular torus. Connections are
//! described by their components in the coframe `dr, dθ, dx, dy`; norms are
//! Frobenius norms taken in the orthonormal frame `(dr, r dθ, dx, dy)`.
//!
//! The orientation is `dx ∧ dy ∧ dw₁ ∧ dw₂`. Conventions that depend on a
//! choice (twist parameter, lattice, Hitchin lift) are collected in
//! [`conventions`] and emitted by `ipl conventions`.

pub mod asymptotics;
pub mod conventions;
pub mod error;
pub mod gauge;
pub mod geometry;
pub mod hitchin;
pub mod models;
pub mod moduli;
pub mod numerics;
pub mod serde_complex;
pub mod spectral;
pub mod stability;
pub mod su2;

pub use error::{Error, Result};
pub use gauge::{CircleKind, Connection, ConnectionSource, CurvatureSample, OneForm, Point};
pub use geometry::{AnnulusGrid, DualTorusPoint, Loop, LoopKind, RadialSpacing, TorusSpec};
pub use hitchin::HiggsPairOnPlane;
pub use models::{ModelKind, ModelParams};
pub use su2::{Mat2, Su2Element};

pub use num_complex::Complex64 as C64;
