use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{Connection, ConnectionSource, OneForm, Point, RadialDomain};
use crate::geometry::TorusSpec;
use crate::su2::{Mat2, Su2Element};

/// The trivial flat connection.
#[derive(Debug, Clone)]
pub struct Flat {
    torus: TorusSpec,
    domain: RadialDomain,
}

impl Flat {
    pub fn new(torus: TorusSpec) -> Self {
        Flat { torus, domain: RadialDomain { r_min: 0.0, r_max: f64::INFINITY } }
    }

    pub fn with_domain(torus: TorusSpec, domain: RadialDomain) -> Self {
        Flat { torus, domain }
    }

    pub fn arc(torus: TorusSpec) -> Connection {
        Arc::new(Self::new(torus))
    }
}

impl ConnectionSource for Flat {
    fn torus(&self) -> TorusSpec {
        self.torus
    }
    fn domain(&self) -> RadialDomain {
        self.domain
    }
    fn eval(&self, _p: &Point) -> OneForm {
        [Mat2::zeros(); 4]
    }
    fn jacobian(&self, _p: &Point) -> Option<[OneForm; 4]> {
        Some([[Mat2::zeros(); 4]; 4])
    }
}

pub type PotentialFn = Arc<dyn Fn(&Point) -> OneForm + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&Point) -> [OneForm; 4] + Send + Sync>;

/// A connection given by closures.
#[derive(Clone)]
pub struct FnConnection {
    pub torus: TorusSpec,
    pub domain: RadialDomain,
    pub potential: PotentialFn,
    pub jacobian: Option<JacobianFn>,
}

impl fmt::Debug for FnConnection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnConnection").field("torus", &self.torus).field("domain", &self.domain).finish()
    }
}

impl FnConnection {
    pub fn new(torus: TorusSpec, domain: RadialDomain, potential: impl Fn(&Point) -> OneForm + Send + Sync + 'static) -> Self {
        FnConnection { torus, domain, potential: Arc::new(potential), jacobian: None }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&Point) -> [OneForm; 4] + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }
}

impl ConnectionSource for FnConnection {
    fn torus(&self) -> TorusSpec {
        self.torus
    }
    fn domain(&self) -> RadialDomain {
        self.domain
    }
    fn eval(&self, p: &Point) -> OneForm {
        (self.potential)(p)
    }
    fn jacobian(&self, p: &Point) -> Option<[OneForm; 4]> {
        self.jacobian.as_ref().map(|j| j(p))
    }
}

/// `g A g⁻¹` for a constant gauge transformation `g`.
#[derive(Debug, Clone)]
pub struct ConstantGauge {
    pub base: Connection,
    pub g: Su2Element,
}

impl ConstantGauge {
    fn conj(&self, m: &Mat2) -> Mat2 {
        self.g.matrix() * m * self.g.matrix().adjoint()
    }
}

impl ConnectionSource for ConstantGauge {
    fn torus(&self) -> TorusSpec {
        self.base.torus()
    }
    fn domain(&self) -> RadialDomain {
        self.base.domain()
    }
    fn eval(&self, p: &Point) -> OneForm {
        let a = self.base.eval(p);
        std::array::from_fn(|k| self.conj(&a[k]))
    }
    fn jacobian(&self, p: &Point) -> Option<[OneForm; 4]> {
        let j = self.base.jacobian(p)?;
        Some(std::array::from_fn(|k| std::array::from_fn(|m| self.conj(&j[k][m]))))
    }
    fn fd_steps(&self, p: &Point) -> [f64; 4] {
        self.base.fd_steps(p)
    }
}

/// `s·A` for a real factor `s`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub base: Connection,
    pub factor: f64,
}

impl ConnectionSource for Scaled {
    fn torus(&self) -> TorusSpec {
        self.base.torus()
    }
    fn domain(&self) -> RadialDomain {
        self.base.domain()
    }
    fn eval(&self, p: &Point) -> OneForm {
        let s = C64::new(self.factor, 0.0);
        self.base.eval(p).map(|m| m * s)
    }
    fn jacobian(&self, p: &Point) -> Option<[OneForm; 4]> {
        let s = C64::new(self.factor, 0.0);
        self.base.jacobian(p).map(|j| j.map(|row| row.map(|m| m * s)))
    }
    fn fd_steps(&self, p: &Point) -> [f64; 4] {
        self.base.fd_steps(p)
    }
}
