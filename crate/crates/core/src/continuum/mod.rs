//! Numerical continuum-limit objects: the nonlocal intermediate
//! functional on grid fields, directional marginal kernels, the
//! cell-problem surface tension, the weighted perimeter on polyhedral
//! interfaces, and the hard-interface consistency experiment tying the
//! discrete energy back to its limit.

mod cell;
mod consistency;
mod marginal;
mod nonlocal;
mod perimeter;

pub use cell::{cell_sigma, ProfileOptions, SigmaResult};
pub use consistency::{hard_interface_consistency, ConsistencyRun};
pub use marginal::{marginal_kernel, MarginalKernel};
pub use nonlocal::f_eps_energy;
pub use perimeter::g_infinity_energy;

use crate::density::BoxDomain;
use crate::error::{Error, Result};
use crate::util::geom;
use std::io::Write;

/// Scalar field sampled at the cell midpoints of a regular grid over a
/// box, together with density values on the same nodes. The midpoint
/// quadrature weight is the common cell volume.
#[derive(Debug, Clone)]
pub struct GridField {
    domain: BoxDomain,
    shape: Vec<usize>,
    u: Vec<f64>,
    rho: Vec<f64>,
}

impl GridField {
    pub fn new(domain: BoxDomain, shape: Vec<usize>, u: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        if shape.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: shape.len() });
        }
        if shape.iter().any(|&r| r < 2) {
            return Err(Error::invalid("grid needs at least 2 cells per axis"));
        }
        let n: usize = shape.iter().product();
        if u.len() != n {
            return Err(Error::SizeMismatch { context: "grid field values", expected: n, got: u.len() });
        }
        if rho.len() != n {
            return Err(Error::SizeMismatch { context: "grid density values", expected: n, got: rho.len() });
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("grid field values must be finite"));
        }
        if rho.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid("grid density values must be finite and nonnegative"));
        }
        Ok(Self { domain, shape, u, rho })
    }

    /// Builds the field by evaluating `u_fn` and `rho_fn` at every node.
    pub fn from_fn(
        domain: BoxDomain,
        shape: Vec<usize>,
        mut u_fn: impl FnMut(&[f64]) -> f64,
        mut rho_fn: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self> {
        if shape.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: shape.len() });
        }
        let n: usize = shape.iter().product();
        let mut u = Vec::with_capacity(n);
        let mut rho = Vec::with_capacity(n);
        let mut idx = vec![0usize; shape.len()];
        let mut x = vec![0.0f64; shape.len()];
        for _ in 0..n {
            for (k, &i) in idx.iter().enumerate() {
                let h = (domain.hi()[k] - domain.lo()[k]) / shape[k] as f64;
                x[k] = domain.lo()[k] + (i as f64 + 0.5) * h;
            }
            u.push(u_fn(&x));
            rho.push(rho_fn(&x));
            let mut k = shape.len();
            while k > 0 {
                k -= 1;
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self::new(domain, shape, u, rho)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn density_values(&self) -> &[f64] {
        &self.rho
    }

    /// Grid spacing along axis `k`.
    pub fn step(&self, k: usize) -> f64 {
        (self.domain.hi()[k] - self.domain.lo()[k]) / self.shape[k] as f64
    }

    /// Midpoint quadrature weight: the cell volume.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.step(k)).product()
    }
}

/// A one-dimensional phase profile on `[-L, L]`, pinned to -1 and +1 at
/// the endpoints and extended by those constants outside.
#[derive(Debug, Clone)]
pub struct Profile1D {
    l: f64,
    values: Vec<f64>,
}

impl Profile1D {
    pub fn new(l: f64, mut values: Vec<f64>) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::invalid("profile half-width must be positive"));
        }
        if values.len() < 3 {
            return Err(Error::invalid("profile needs at least 3 nodes"));
        }
        if values.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
            return Err(Error::invalid("profile values must lie in [-1, 1]"));
        }
        for v in values.iter_mut() {
            *v = v.clamp(-1.0, 1.0);
        }
        let m = values.len();
        values[0] = -1.0;
        values[m - 1] = 1.0;
        Ok(Self { l, values })
    }

    /// The tanh ramp sampled on `m` nodes; the usual optimizer start.
    pub fn tanh_init(l: f64, m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::invalid("profile needs at least 3 nodes"));
        }
        let h = 2.0 * l / (m - 1) as f64;
        let values = (0..m).map(|i| (-l + i as f64 * h).tanh()).collect();
        Self::new(l, values)
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        2.0 * self.l / (self.values.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation inside `[-L, L]`, constant extension outside.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= -self.l {
            return -1.0;
        }
        if t >= self.l {
            return 1.0;
        }
        let h = self.step();
        let pos = (t + self.l) / h;
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Writes the profile as CSV lines `t,f`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,f")?;
        let h = self.step();
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{v}", -self.l + i as f64 * h)?;
        }
        Ok(())
    }
}

/// One flat face of a polyhedral interface: its vertices, a unit
/// normal, and the face area (computed from the vertices).
#[derive(Debug, Clone)]
pub struct Face {
    vertices: Vec<Vec<f64>>,
    normal: Vec<f64>,
    area: f64,
}

impl Face {
    /// A face is one point in d=1, a segment in d=2, and a planar
    /// polygon (at least a triangle) in d=3. The normal must be unit
    /// length and orthogonal to the face.
    pub fn new(vertices: Vec<Vec<f64>>, normal: Vec<f64>) -> Result<Self> {
        let dim = normal.len();
        if dim == 0 || dim > 3 {
            return Err(Error::invalid("faces are supported in dimensions 1 to 3"));
        }
        if vertices.is_empty() || vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid("face vertices must match the normal's dimension"));
        }
        let nrm = geom::norm(&normal);
        if !(nrm.is_finite() && (nrm - 1.0).abs() <= 1e-9) {
            return Err(Error::invalid("face normal must be unit length"));
        }
        let normal: Vec<f64> = normal.iter().map(|c| c / nrm).collect();
        let expected = match dim {
            1 => 1,
            2 => 2,
            _ => 3,
        };
        if vertices.len() < expected {
            return Err(Error::invalid(format!(
                "a face in dimension {dim} needs at least {expected} vertices"
            )));
        }
        if dim == 1 && vertices.len() != 1 {
            return Err(Error::invalid("a face in dimension 1 is a single point"));
        }
        if dim == 2 && vertices.len() != 2 {
            return Err(Error::invalid("a face in dimension 2 is a segment"));
        }
        // Edges must be orthogonal to the declared normal.
        for v in vertices.iter().skip(1) {
            let d: Vec<f64> = v.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect();
            let along = geom::dot(&d, &normal).abs();
            if along > 1e-9 * (1.0 + geom::norm(&d)) {
                return Err(Error::invalid("face vertices do not lie in the normal's plane"));
            }
        }
        let area = match dim {
            1 => 1.0,
            2 => geom::dist(&vertices[0], &vertices[1]),
            _ => {
                let mut total = 0.0;
                for i in 1..vertices.len() - 1 {
                    let a: Vec<f64> =
                        vertices[i].iter().zip(&vertices[0]).map(|(x, y)| x - y).collect();
                    let b: Vec<f64> =
                        vertices[i + 1].iter().zip(&vertices[0]).map(|(x, y)| x - y).collect();
                    let cx = a[1] * b[2] - a[2] * b[1];
                    let cy = a[2] * b[0] - a[0] * b[2];
                    let cz = a[0] * b[1] - a[1] * b[0];
                    total += 0.5 * geom::dot(&[cx, cy, cz], &normal);
                }
                total.abs()
            }
        };
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::invalid("face area must be positive"));
        }
        Ok(Self { vertices, normal, area })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }
}

/// A union of finitely many flat faces standing in for the reduced
/// boundary of a set of finite perimeter.
#[derive(Debug, Clone)]
pub struct PolyhedralInterface {
    faces: Vec<Face>,
}

impl PolyhedralInterface {
    pub fn new(faces: Vec<Face>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyInput("interface faces"));
        }
        let dim = faces[0].dim();
        if faces.iter().any(|f| f.dim() != dim) {
            return Err(Error::invalid("all faces must share a dimension"));
        }
        Ok(Self { faces })
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn dim(&self) -> usize {
        self.faces[0].dim()
    }

    pub fn total_area(&self) -> f64 {
        self.faces.iter().map(Face::area).sum()
    }
}
