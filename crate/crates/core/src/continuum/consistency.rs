//! Empirical check that the graph energy of a hard planar interface
//! tracks its weighted-perimeter prediction.

use super::cell::hard_profile_value;
use super::marginal::{marginal_kernel, transverse_basis};
use super::perimeter::face_quadrature;
use super::Face;
use crate::cloud::LabelField;
use crate::density::Density;
use crate::energy::gl_energy;
use crate::error::{Error, Result};
use crate::graph::build_graph;
use crate::kernel::Kernel;
use crate::potential::Potential;
use crate::util::ExactSum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// One draw of the experiment: sample points, label them by the side
/// of a plane, and compare graph energy against the sharp-interface
/// prediction for that plane.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyRun {
    pub n: usize,
    pub eps: f64,
    pub discrete_energy: f64,
    pub prediction: f64,
    pub ratio: f64,
}

/// Clips the plane through `point` with unit normal `nu` against the
/// density's bounding box and returns it as a face.
fn clip_plane(rho: &Density, point: &[f64], nu: &[f64]) -> Result<Face> {
    let bb = rho.bounding_box();
    let dim = rho.dim();
    let (lo, hi) = (bb.lo(), bb.hi());
    let signed = |x: &[f64]| -> f64 {
        let mut s = 0.0;
        for k in 0..dim {
            s += (x[k] - point[k]) * nu[k];
        }
        s
    };
    let mut hits: Vec<Vec<f64>> = Vec::new();
    let mut push_unique = |x: Vec<f64>| {
        if !hits.iter().any(|h| h.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-12)) {
            hits.push(x);
        }
    };
    match dim {
        1 => {
            if bb.contains(point) {
                push_unique(point.to_vec());
            }
        }
        _ => {
            // Walk every box edge and keep the plane crossings,
            // including corners sitting exactly on the plane.
            let corners: Vec<Vec<f64>> = (0..1usize << dim)
                .map(|mask| {
                    (0..dim)
                        .map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] })
                        .collect()
                })
                .collect();
            for (i, a) in corners.iter().enumerate() {
                for (j, b) in corners.iter().enumerate().skip(i + 1) {
                    if (i ^ j).count_ones() != 1 {
                        continue;
                    }
                    let (sa, sb) = (signed(a), signed(b));
                    if sa == 0.0 {
                        push_unique(a.clone());
                    }
                    if sb == 0.0 {
                        push_unique(b.clone());
                    }
                    if sa * sb < 0.0 {
                        let t = sa / (sa - sb);
                        push_unique(
                            (0..dim).map(|k| a[k] + t * (b[k] - a[k])).collect(),
                        );
                    }
                }
            }
        }
    }
    let needed = match dim {
        1 => 1,
        2 => 2,
        _ => 3,
    };
    if hits.len() < needed {
        return Err(Error::invalid(
            "the interface plane misses the density's bounding box",
        ));
    }
    if dim == 3 {
        // Order the crossings around their centroid so the fan
        // triangulation covers the polygon once.
        let centroid: Vec<f64> = (0..3)
            .map(|k| hits.iter().map(|h| h[k]).sum::<f64>() / hits.len() as f64)
            .collect();
        let basis = transverse_basis(nu);
        hits.sort_by(|a, b| {
            let ang = |x: &Vec<f64>| {
                let mut c = [0.0f64; 2];
                for (m, e) in basis.iter().enumerate() {
                    for k in 0..3 {
                        c[m] += (x[k] - centroid[k]) * e[k];
                    }
                }
                c[1].atan2(c[0])
            };
            ang(a).total_cmp(&ang(b))
        });
    }
    Face::new(hits, nu.to_vec())
}

/// Samples `n` points from `rho`, labels them with the sign of the
/// plane through `point` with normal `normal`, and returns the graph
/// energy next to the perimeter prediction for the same plane.
#[allow(clippy::too_many_arguments)]
pub fn hard_interface_consistency(
    rho: &Density,
    point: &[f64],
    normal: &[f64],
    n: usize,
    eps: f64,
    p: f64,
    kernel: &Kernel,
    potential: &Potential,
    seed: u64,
) -> Result<ConsistencyRun> {
    let dim = rho.dim();
    if point.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: point.len() });
    }
    if normal.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: normal.len() });
    }
    if kernel.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: kernel.dim() });
    }
    let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 1e-12 && norm.is_finite()) {
        return Err(Error::invalid("interface normal must be nonzero"));
    }
    let nu: Vec<f64> = normal.iter().map(|v| v / norm).collect();

    let face = clip_plane(rho, point, &nu)?;
    let quad = if dim >= 3 { 256 } else { 1024 };
    let mk = marginal_kernel(kernel, &nu, quad)?;
    let mut boundary = ExactSum::new();
    for (x, w) in face_quadrature(&face) {
        let rx = rho.eval(&x);
        boundary.add(w * rx * rx);
    }
    let prediction = hard_profile_value(1.0, p, &mk) * boundary.value();
    if !(prediction > 0.0) {
        return Err(Error::invalid(
            "the interface carries no density mass, so the ratio is undefined",
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cloud = rho.sample(n, &mut rng)?;
    let labels: Vec<f64> = (0..n)
        .map(|i| {
            let x = cloud.point(i);
            let mut s = 0.0;
            for k in 0..dim {
                s += (x[k] - point[k]) * nu[k];
            }
            if s >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let graph = build_graph(&cloud, kernel, eps)?;
    let discrete_energy = gl_energy(&graph, &LabelField::new(labels), p, potential)?.total;

    Ok(ConsistencyRun {
        n,
        eps,
        discrete_energy,
        prediction,
        ratio: discrete_energy / prediction,
    })
}
