//! Sampling densities: normalized, bounded above and below on their domain,
//! with rejection sampling and quadrature helpers.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::util::{for_each_multi_index, GL4_NODES, GL4_WEIGHTS};
use rand::Rng;

/// Axis-aligned box [lo_1,hi_1] x ... x [lo_d,hi_d].
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::EmptyInput("box domain"));
        }
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        for k in 0..lo.len() {
            if !(lo[k].is_finite() && hi[k].is_finite() && lo[k] < hi[k]) {
                return Err(Error::invalid(format!(
                    "box axis {k} needs finite lo < hi, got [{}, {}]",
                    lo[k], hi[k]
                )));
            }
        }
        Ok(BoxDomain { lo, hi })
    }

    pub fn unit_cube(dim: usize) -> Self {
        BoxDomain { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn side(&self, k: usize) -> f64 {
        self.hi[k] - self.lo[k]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.side(k)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&l, &h))| v >= l && v <= h)
    }

    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim()).map(|k| rng.gen_range(self.lo[k]..self.hi[k])).collect()
    }
}

/// Boolean raster over a box; cells are equal-size, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskGrid {
    domain: BoxDomain,
    shape: Vec<usize>,
    inside: Vec<bool>,
}

impl MaskGrid {
    pub fn new(domain: BoxDomain, shape: Vec<usize>, inside: Vec<bool>) -> Result<Self> {
        if shape.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: shape.len() });
        }
        let cells: usize = shape.iter().product();
        if cells == 0 {
            return Err(Error::invalid("mask shape must have no zero axis"));
        }
        if inside.len() != cells {
            return Err(Error::SizeMismatch {
                context: "mask grid",
                expected: cells,
                got: inside.len(),
            });
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::EmptyInput("mask grid covers no cells"));
        }
        Ok(MaskGrid { domain, shape, inside })
    }

    /// Rasterizes a region given by a membership predicate, sampled at cell
    /// centers.
    pub fn from_fn(
        domain: BoxDomain,
        shape: Vec<usize>,
        f: impl Fn(&[f64]) -> bool,
    ) -> Result<Self> {
        let cells: usize = shape.iter().product();
        if shape.len() != domain.dim() || cells == 0 {
            return Err(Error::invalid("mask shape must match domain dim and be nonempty"));
        }
        let mut inside = Vec::with_capacity(cells);
        let mut center = vec![0.0; domain.dim()];
        for_each_multi_index(&shape, |idx| {
            for k in 0..domain.dim() {
                center[k] =
                    domain.lo[k] + (idx[k] as f64 + 0.5) * domain.side(k) / shape[k] as f64;
            }
            inside.push(f(&center));
        });
        Self::new(domain, shape, inside)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn cell_volume(&self) -> f64 {
        self.domain.volume() / self.inside.len() as f64
    }

    fn cell_of(&self, x: &[f64]) -> Option<usize> {
        if !self.domain.contains(x) {
            return None;
        }
        let mut flat = 0usize;
        for k in 0..self.dim() {
            let t = (x[k] - self.domain.lo[k]) / self.domain.side(k);
            let c = ((t * self.shape[k] as f64) as usize).min(self.shape[k] - 1);
            flat = flat * self.shape[k] + c;
        }
        Some(flat)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.cell_of(x).map(|c| self.inside[c]).unwrap_or(false)
    }

    pub fn covered_volume(&self) -> f64 {
        self.inside.iter().filter(|&&b| b).count() as f64 * self.cell_volume()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum DensityForm {
    Uniform,
    GaussianMarginal { mean: f64, stddev: f64, axis: usize, mask: MaskGrid },
    Tabulated { shape: Vec<usize>, values: Vec<f64> },
}

/// A probability density on (a subset of) a box, normalized at construction.
///
/// `bounds()` returns constants 0 < c1 <= c2 with c1 <= rho <= c2 on the
/// domain; `eval` returns 0 outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    bounding: BoxDomain,
    form: DensityForm,
    norm: f64,
    c1: f64,
    c2: f64,
}

impl Density {
    pub fn uniform(domain: BoxDomain) -> Self {
        let v = domain.volume();
        Density {
            bounding: domain,
            form: DensityForm::Uniform,
            norm: v,
            c1: 1.0 / v,
            c2: 1.0 / v,
        }
    }

    /// Density proportional to a Gaussian in one coordinate, restricted to a
    /// masked region (the other coordinates enter only through the mask).
    pub fn gaussian_marginal(mean: f64, stddev: f64, axis: usize, mask: MaskGrid) -> Result<Self> {
        if !(stddev.is_finite() && stddev > 0.0) || !mean.is_finite() {
            return Err(Error::invalid("gaussian marginal needs finite mean and stddev > 0"));
        }
        let d = mask.dim();
        if axis >= d {
            return Err(Error::invalid(format!("axis {axis} out of range for dim {d}")));
        }
        let dom = mask.domain().clone();
        let na = mask.shape()[axis];
        let h = dom.side(axis) / na as f64;
        let phi = |t: f64| -> f64 {
            let z = (t - mean) / stddev;
            (-0.5 * z * z).exp()
        };
        // Per-cell averages of the axis profile, Gauss-Legendre per cell.
        let mut phi_bar = vec![0.0; na];
        for (i, pb) in phi_bar.iter_mut().enumerate() {
            let a = dom.lo[axis] + i as f64 * h;
            let mid = a + 0.5 * h;
            let mut s = 0.0;
            for (g, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                s += w * phi(mid + 0.5 * h * g);
            }
            *pb = 0.5 * s;
        }
        let cell_vol = mask.cell_volume();
        let mut z = 0.0;
        let mut sup_raw: f64 = 0.0;
        let mut inf_raw = f64::INFINITY;
        let mut cell = 0usize;
        let shape = mask.shape().to_vec();
        for_each_multi_index(&shape, |idx| {
            if mask.inside[cell] {
                let ia = idx[axis];
                z += phi_bar[ia] * cell_vol;
                let t0 = dom.lo[axis] + ia as f64 * h;
                let t1 = t0 + h;
                // Gaussian is unimodal: extremes over a cell sit at the
                // endpoint nearest/farthest from the mean.
                let hi = if mean >= t0 && mean <= t1 {
                    1.0
                } else {
                    phi(if (t0 - mean).abs() < (t1 - mean).abs() { t0 } else { t1 })
                };
                let lo = phi(if (t0 - mean).abs() > (t1 - mean).abs() { t0 } else { t1 });
                sup_raw = sup_raw.max(hi);
                inf_raw = inf_raw.min(lo);
            }
            cell += 1;
        });
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::Numerical("gaussian marginal normalization vanished".into()));
        }
        Ok(Density {
            bounding: dom,
            form: DensityForm::GaussianMarginal { mean, stddev, axis, mask },
            norm: z,
            c1: inf_raw / z,
            c2: sup_raw / z,
        })
    }

    /// Piecewise-constant density from strictly positive cell values on a
    /// raster over the whole box.
    pub fn tabulated(domain: BoxDomain, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if shape.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: shape.len() });
        }
        let cells: usize = shape.iter().product();
        if cells == 0 || values.len() != cells {
            return Err(Error::SizeMismatch {
                context: "tabulated density",
                expected: cells,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("tabulated density values must be finite and > 0"));
        }
        let cell_vol = domain.volume() / cells as f64;
        let z: f64 = values.iter().sum::<f64>() * cell_vol;
        let c1 = values.iter().cloned().fold(f64::INFINITY, f64::min) / z;
        let c2 = values.iter().cloned().fold(0.0f64, f64::max) / z;
        Ok(Density {
            bounding: domain,
            form: DensityForm::Tabulated { shape, values },
            norm: z,
            c1,
            c2,
        })
    }

    pub fn dim(&self) -> usize {
        self.bounding.dim()
    }

    /// Bounding box of the support.
    pub fn bounding_box(&self) -> &BoxDomain {
        &self.bounding
    }

    /// (c1, c2) with c1 <= rho <= c2 on the domain.
    pub fn bounds(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if !self.bounding.contains(x) {
            return 0.0;
        }
        match &self.form {
            DensityForm::Uniform => 1.0 / self.norm,
            DensityForm::GaussianMarginal { mean, stddev, axis, mask } => {
                if !mask.contains(x) {
                    return 0.0;
                }
                let z = (x[*axis] - mean) / stddev;
                (-0.5 * z * z).exp() / self.norm
            }
            DensityForm::Tabulated { shape, values } => {
                let mut flat = 0usize;
                for k in 0..self.dim() {
                    let t = (x[k] - self.bounding.lo[k]) / self.bounding.side(k);
                    let c = ((t * shape[k] as f64) as usize).min(shape[k] - 1);
                    flat = flat * shape[k] + c;
                }
                values[flat] / self.norm
            }
        }
    }

    /// Membership in the support (mask-aware, unlike the bounding box).
    pub fn supports(&self, x: &[f64]) -> bool {
        self.eval(x) > 0.0
    }

    /// Draws n iid points by rejection from the bounding box.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<PointCloud> {
        if n == 0 {
            return Err(Error::EmptyInput("sample size"));
        }
        let bound = self.c2;
        let mut coords = Vec::with_capacity(n * self.dim());
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        let cap = 50_000usize.saturating_mul(n).max(1_000_000);
        while accepted < n {
            attempts += 1;
            if attempts > cap {
                return Err(Error::Numerical(format!(
                    "rejection sampling accepted {accepted}/{n} after {attempts} draws"
                )));
            }
            let x = self.bounding.sample_uniform(rng);
            let r: f64 = rng.gen();
            if r * bound < self.eval(&x) {
                coords.extend_from_slice(&x);
                accepted += 1;
            }
        }
        PointCloud::from_flat(self.dim(), coords)
    }

    /// Midpoint-rule mass over the bounding box, for independent checks of
    /// the normalization.
    pub fn total_mass_quadrature(&self, per_axis: usize) -> f64 {
        let d = self.dim();
        let shape = vec![per_axis; d];
        let cell_vol = self.bounding.volume() / (per_axis as f64).powi(d as i32);
        let mut x = vec![0.0; d];
        let mut total = 0.0;
        for_each_multi_index(&shape, |idx| {
            for k in 0..d {
                x[k] = self.bounding.lo[k]
                    + (idx[k] as f64 + 0.5) * self.bounding.side(k) / per_axis as f64;
            }
            total += self.eval(&x) * cell_vol;
        });
        total
    }
}
