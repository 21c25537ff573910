//! Grid-sampled connections and their JSON form.
//!
//! Layout: a header with the torus and annulus grid, then `data`, a flat list
//! of `[re, im]` pairs in row-major order over
//! `(i_r, i_θ, i_x, i_y, component, entry)` where components are
//! `a_r, a_θ, a_x, a_y` and entries are `(0,0), (0,1), (1,0), (1,1)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{potential, ConnectionSource, OneForm, Point, RadialDomain};
use crate::error::{Error, Result};
use crate::geometry::{AnnulusGrid, TorusSpec};
use crate::su2::Mat2;

pub const CONNECTION_SCHEMA: &str = "ipl.connection.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledHeader {
    pub schema: String,
    pub reduced: bool,
    pub torus: TorusSpec,
    pub grid: AnnulusGrid,
    pub components: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SampledJson {
    #[serde(flatten)]
    header: SampledHeader,
    data: Vec<[f64; 2]>,
}

/// A connection known on an [`AnnulusGrid`], interpolated multilinearly
/// (periodically in `θ, x, y`).
#[derive(Debug, Clone)]
pub struct SampledConnection {
    pub torus: TorusSpec,
    pub grid: AnnulusGrid,
    radii: Vec<f64>,
    values: Vec<OneForm>,
}

impl SampledConnection {
    pub fn sample(conn: &dyn ConnectionSource, grid: &AnnulusGrid) -> Result<Self> {
        grid.validate()?;
        let torus = conn.torus();
        let radii = grid.radii();
        let thetas = grid.thetas();
        let xs = grid.xs(&torus);
        let ys = grid.ys(&torus);
        let values: Result<Vec<OneForm>> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let (a, b, c, d) = grid.unindex(i);
                potential(conn, &Point::new(radii[a], thetas[b], xs[c], ys[d]))
            })
            .collect();
        Ok(SampledConnection { torus, grid: grid.clone(), radii, values: values? })
    }

    pub fn from_values(torus: TorusSpec, grid: AnnulusGrid, values: Vec<OneForm>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::DomainMismatch(format!("{} samples for a grid of {}", values.len(), grid.len())));
        }
        Ok(SampledConnection { torus, radii: grid.radii(), grid, values })
    }

    pub fn values(&self) -> &[OneForm] {
        &self.values
    }

    pub fn to_json(&self) -> String {
        let mut data = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            for m in v {
                for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    data.push([m[(i, j)].re, m[(i, j)].im]);
                }
            }
        }
        let json = SampledJson {
            header: SampledHeader {
                schema: CONNECTION_SCHEMA.to_string(),
                reduced: false,
                torus: self.torus,
                grid: self.grid.clone(),
                components: ["a_r", "a_theta", "a_x", "a_y"].iter().map(|s| s.to_string()).collect(),
            },
            data,
        };
        serde_json::to_string(&json).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: SampledJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if j.header.schema != CONNECTION_SCHEMA || j.header.reduced {
            return Err(Error::Parse(format!("expected an unreduced {CONNECTION_SCHEMA} document")));
        }
        j.header.torus.validate()?;
        j.header.grid.validate()?;
        let n = j.header.grid.len();
        if j.data.len() != n * 16 {
            return Err(Error::Parse(format!("expected {} entries, found {}", n * 16, j.data.len())));
        }
        let values = j
            .data
            .chunks(16)
            .map(|c| {
                std::array::from_fn(|k| {
                    let e = |i: usize| C64::new(c[4 * k + i][0], c[4 * k + i][1]);
                    Mat2::new(e(0), e(1), e(2), e(3))
                })
            })
            .collect();
        Self::from_values(j.header.torus, j.header.grid, values)
    }

    fn radial_cell(&self, r: f64) -> (usize, f64) {
        let n = self.radii.len();
        let i = match self.radii.binary_search_by(|v| v.partial_cmp(&r).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let t = ((r - self.radii[i]) / (self.radii[i + 1] - self.radii[i])).clamp(0.0, 1.0);
        (i, t)
    }
}

fn periodic_cell(v: f64, period: f64, n: usize) -> (usize, usize, f64) {
    let u = (v / period).rem_euclid(1.0) * n as f64;
    let i = (u.floor() as usize).min(n - 1);
    (i, (i + 1) % n, u - i as f64)
}

impl ConnectionSource for SampledConnection {
    fn torus(&self) -> TorusSpec {
        self.torus
    }

    fn domain(&self) -> RadialDomain {
        RadialDomain { r_min: self.grid.r_min, r_max: self.grid.r_max }
    }

    fn eval(&self, p: &Point) -> OneForm {
        let g = &self.grid;
        let (ir, tr) = self.radial_cell(p.r);
        let (it0, it1, tt) = periodic_cell(p.theta, 2.0 * PI, g.n_theta);
        let (ix0, ix1, tx) = periodic_cell(p.x, self.torus.period_x, g.n_x);
        let (iy0, iy1, ty) = periodic_cell(p.y, self.torus.period_y, g.n_y);
        let mut out = [Mat2::zeros(); 4];
        for (a, wa) in [(ir, 1.0 - tr), (ir + 1, tr)] {
            for (b, wb) in [(it0, 1.0 - tt), (it1, tt)] {
                for (c, wc) in [(ix0, 1.0 - tx), (ix1, tx)] {
                    for (d, wd) in [(iy0, 1.0 - ty), (iy1, ty)] {
                        let w = wa * wb * wc * wd;
                        if w == 0.0 {
                            continue;
                        }
                        let v = &self.values[g.index(a, b, c, d)];
                        for k in 0..4 {
                            out[k] += v[k] * C64::new(w, 0.0);
                        }
                    }
                }
            }
        }
        out
    }

    fn fd_steps(&self, p: &Point) -> [f64; 4] {
        let (ir, _) = self.radial_cell(p.r);
        let dr = self.radii[ir + 1] - self.radii[ir];
        [
            (dr / 4.0).min(0.25 * p.r),
            2.0 * PI / self.grid.n_theta as f64 / 4.0,
            self.torus.period_x / self.grid.n_x as f64 / 4.0,
            self.torus.period_y / self.grid.n_y as f64 / 4.0,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{FnConnection, RadialDomain};
    use crate::geometry::RadialSpacing;
    use crate::su2::{c, diag_i, sigma1};

    #[test]
    fn json_roundtrip_reproduces_nodes() {
        let t = TorusSpec::default();
        let conn = FnConnection::new(t, RadialDomain::from(1.0), |p| {
            [sigma1() * c(0.0, p.r.recip()), diag_i(p.theta.cos()), diag_i(p.x.sin()), diag_i(0.1 * p.y.cos())]
        });
        let grid = AnnulusGrid::new(2.0, 4.0, 5, 8, 4, 4, RadialSpacing::LogRadial).unwrap();
        let s = SampledConnection::sample(&conn, &grid).unwrap();
        let back = SampledConnection::from_json(&s.to_json()).unwrap();
        let radii = grid.radii();
        for i in [0, 17, grid.len() - 1] {
            let (a, b, cc, d) = grid.unindex(i);
            let p = Point::new(radii[a], grid.thetas()[b], grid.xs(&t)[cc], grid.ys(&t)[d]);
            let v = back.eval(&p);
            let w = conn.eval(&p);
            for k in 0..4 {
                assert!(crate::su2::frob(&(v[k] - w[k])) < 1e-14);
            }
        }
        assert!(SampledConnection::from_json("{\"schema\":\"x\"}").is_err());
    }

    #[test]
    fn interpolation_is_periodic() {
        let t = TorusSpec::default();
        let conn = FnConnection::new(t, RadialDomain::from(1.0), |p| [Mat2::zeros(), Mat2::zeros(), diag_i(p.x.sin()), Mat2::zeros()]);
        let grid = AnnulusGrid::new(2.0, 4.0, 4, 4, 16, 4, RadialSpacing::Uniform).unwrap();
        let s = SampledConnection::sample(&conn, &grid).unwrap();
        let a = s.eval(&Point::new(3.0, 0.0, 0.1, 0.0));
        let b = s.eval(&Point::new(3.0, 0.0, 0.1 + t.period_x, 0.0));
        assert!(crate::su2::frob(&(a[2] - b[2])) < 1e-14);
    }
}
