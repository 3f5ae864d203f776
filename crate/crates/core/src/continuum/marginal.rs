//! Directional marginal of an interaction kernel: integrate out the
//! components orthogonal to a direction, leaving a one-dimensional
//! even kernel that drives the cell problem.

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::util::{geom, ExactSum};

/// `eta_hat(s) = integral of eta(s nu + y) over y in the hyperplane
/// orthogonal to nu`, tabulated on a uniform grid over the kernel's
/// support `[-R, R]` and evaluated by linear interpolation.
#[derive(Debug, Clone)]
pub struct MarginalKernel {
    radius: f64,
    values: Vec<f64>,
}

impl MarginalKernel {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn step(&self) -> f64 {
        2.0 * self.radius / (self.values.len() - 1) as f64
    }

    /// Linear interpolation; zero outside the support.
    pub fn eval(&self, s: f64) -> f64 {
        if s.abs() > self.radius {
            return 0.0;
        }
        let pos = (s + self.radius) / self.step();
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Trapezoid value of `integral eta_hat(s) |s| ds` over the table.
    pub fn abs_first_moment(&self) -> f64 {
        let h = self.step();
        let mut sum = ExactSum::new();
        for (i, v) in self.values.iter().enumerate() {
            let s = -self.radius + i as f64 * h;
            let w = if i == 0 || i == self.values.len() - 1 { 0.5 * h } else { h };
            sum.add(w * v * s.abs());
        }
        sum.value()
    }
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector
/// `nu`: the trailing columns of the Householder reflector that maps
/// the first coordinate axis onto `-sign(nu_1) nu`.
pub(super) fn transverse_basis(nu: &[f64]) -> Vec<Vec<f64>> {
    let d = nu.len();
    let sign = if nu[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = nu.to_vec();
    v[0] += sign;
    // |v|^2 = 2 + 2|nu_1| >= 2 for unit nu, so this never degenerates.
    let vn = geom::norm(&v);
    let v: Vec<f64> = v.iter().map(|c| c / vn).collect();
    (1..d)
        .map(|j| {
            let mut col = vec![0.0; d];
            col[j] = 1.0;
            for (k, item) in col.iter_mut().enumerate() {
                *item -= 2.0 * v[k] * v[j];
            }
            col
        })
        .collect()
}

/// Tabulates the marginal kernel in direction `nu`. `quad_pts` sets
/// both the table resolution in `s` and the midpoint nodes per
/// transverse axis.
pub fn marginal_kernel(kernel: &Kernel, nu: &[f64], quad_pts: usize) -> Result<MarginalKernel> {
    let d = kernel.dim();
    if nu.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: nu.len() });
    }
    let nrm = geom::norm(nu);
    if !(nrm.is_finite() && (nrm - 1.0).abs() <= 1e-9) {
        return Err(Error::invalid("marginal direction must be a unit vector"));
    }
    if quad_pts < 8 {
        return Err(Error::invalid("marginal kernel needs at least 8 quadrature points"));
    }
    let radius = kernel.support_radius();
    let count = quad_pts | 1;
    let hs = 2.0 * radius / (count - 1) as f64;

    if d == 1 {
        let values = (0..count)
            .map(|i| {
                let s = -radius + i as f64 * hs;
                kernel.eval(&[s * nu[0]])
            })
            .collect();
        return Ok(MarginalKernel { radius, values });
    }

    let basis = transverse_basis(nu);
    let q = quad_pts;
    let hq = 2.0 * radius / q as f64;
    let weight = hq.powi(d as i32 - 1);
    let mut values = Vec::with_capacity(count);
    let mut idx = vec![0usize; d - 1];
    let mut x = vec![0.0f64; d];
    for i in 0..count {
        let s = -radius + i as f64 * hs;
        let mut sum = ExactSum::new();
        idx.fill(0);
        let nodes = q.pow(d as u32 - 1);
        for _ in 0..nodes {
            for (k, xv) in x.iter_mut().enumerate() {
                *xv = s * nu[k];
            }
            for (axis, bvec) in basis.iter().enumerate() {
                let c = -radius + (idx[axis] as f64 + 0.5) * hq;
                for (k, xv) in x.iter_mut().enumerate() {
                    *xv += c * bvec[k];
                }
            }
            sum.add(kernel.eval(&x));
            let mut k = 0;
            while k < d - 1 {
                idx[k] += 1;
                if idx[k] < q {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
        values.push(sum.value() * weight);
    }
    Ok(MarginalKernel { radius, values })
}
