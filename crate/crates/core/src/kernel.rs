//! Interaction kernels: even, nonnegative, compactly supported profiles
//! eta(z) that the graph builder rescales by eps.

use crate::error::{Error, Result};
use crate::util::geom;

/// Symmetric convex body used by the anisotropic indicator kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    /// Axis-aligned box {|z_k| <= half_widths[k]}.
    Box { half_widths: Vec<f64> },
    /// {sum_k (z_k / semi_axes[k])^2 <= 1}.
    Ellipsoid { semi_axes: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelShape {
    /// Indicator of the closed ball of the given radius.
    BallIndicator { radius: f64 },
    /// exp(-|z|^2 / bandwidth^2) cut off at |z| = cutoff * bandwidth.
    TruncatedGaussian { bandwidth: f64, cutoff: f64 },
    /// Indicator of a symmetric convex body, for direction-dependent ranges.
    AnisotropicIndicator { body: ConvexBody },
    /// Indicator of the annulus {inner <= |z| <= outer}. This one vanishes
    /// near the origin on purpose: it exists so the assumption checker has a
    /// built-in profile that fails the positivity-at-zero requirement.
    ShellIndicator { inner: f64, outer: f64 },
}

/// A validated kernel bound to a spatial dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    shape: KernelShape,
    dim: usize,
}

impl Kernel {
    pub fn new(shape: KernelShape, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("kernel dimension must be at least 1"));
        }
        match &shape {
            KernelShape::BallIndicator { radius } => {
                require_pos(*radius, "ball radius")?;
            }
            KernelShape::TruncatedGaussian { bandwidth, cutoff } => {
                require_pos(*bandwidth, "gaussian bandwidth")?;
                require_pos(*cutoff, "gaussian cutoff")?;
            }
            KernelShape::AnisotropicIndicator { body } => {
                let axes = match body {
                    ConvexBody::Box { half_widths } => half_widths,
                    ConvexBody::Ellipsoid { semi_axes } => semi_axes,
                };
                if axes.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: axes.len(),
                    });
                }
                for &a in axes {
                    require_pos(a, "body semi-axis")?;
                }
            }
            KernelShape::ShellIndicator { inner, outer } => {
                if !(inner.is_finite() && *inner >= 0.0) {
                    return Err(Error::invalid("shell inner radius must be finite and >= 0"));
                }
                require_pos(*outer, "shell outer radius")?;
                if inner >= outer {
                    return Err(Error::invalid("shell requires inner < outer"));
                }
            }
        }
        Ok(Kernel { shape, dim })
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// eta(z). Even in z exactly: every branch depends on z only through
    /// squares, so eval(-z) is bitwise equal to eval(z).
    pub fn eval(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim);
        match &self.shape {
            KernelShape::BallIndicator { radius } => {
                if geom::norm2(z) <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            KernelShape::TruncatedGaussian { bandwidth, cutoff } => {
                let r2 = geom::norm2(z);
                let cut = cutoff * bandwidth;
                if r2 <= cut * cut {
                    (-r2 / (bandwidth * bandwidth)).exp()
                } else {
                    0.0
                }
            }
            KernelShape::AnisotropicIndicator { body } => match body {
                ConvexBody::Box { half_widths } => {
                    for (zk, hk) in z.iter().zip(half_widths) {
                        if zk * zk > hk * hk {
                            return 0.0;
                        }
                    }
                    1.0
                }
                ConvexBody::Ellipsoid { semi_axes } => {
                    let mut q = 0.0;
                    for (zk, ak) in z.iter().zip(semi_axes) {
                        let t = zk / ak;
                        q += t * t;
                    }
                    if q <= 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
            },
            KernelShape::ShellIndicator { inner, outer } => {
                let r2 = geom::norm2(z);
                if r2 >= inner * inner && r2 <= outer * outer {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn at_origin(&self) -> f64 {
        let z = vec![0.0; self.dim];
        self.eval(&z)
    }

    /// Radius of the smallest origin-centered ball containing the support.
    pub fn support_radius(&self) -> f64 {
        match &self.shape {
            KernelShape::BallIndicator { radius } => *radius,
            KernelShape::TruncatedGaussian { bandwidth, cutoff } => bandwidth * cutoff,
            KernelShape::AnisotropicIndicator { body } => match body {
                ConvexBody::Box { half_widths } => geom::norm(half_widths),
                ConvexBody::Ellipsoid { semi_axes } => {
                    semi_axes.iter().cloned().fold(0.0, f64::max)
                }
            },
            KernelShape::ShellIndicator { outer, .. } => *outer,
        }
    }
}

fn require_pos(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite and > 0, got {x}")))
    }
}
