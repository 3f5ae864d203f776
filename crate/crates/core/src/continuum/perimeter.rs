//! Weighted-perimeter energy of a polyhedral interface: the surface
//! tension integrated over the faces against the density.

use super::cell::{cell_sigma, ProfileOptions};
use super::{Face, PolyhedralInterface};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::potential::Potential;
use crate::util::{ExactSum, GL4_NODES, GL4_WEIGHTS};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Mutex;

/// Directions the surface tension is actually solved at. Face normals
/// snap to the nearest entry so repeated solves hit the cache.
fn direction_table(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..64)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci sphere: near-uniform coverage with 256 points.
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            (0..256)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / 256.0;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = golden * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => unreachable!("interfaces are validated to dimension <= 3"),
    }
}

fn snap_direction(table: &[Vec<f64>], nu: &[f64]) -> u32 {
    let mut best = 0usize;
    let mut best_dot = f64::NEG_INFINITY;
    for (i, cand) in table.iter().enumerate() {
        let dot: f64 = cand.iter().zip(nu).map(|(a, b)| a * b).sum();
        if dot > best_dot {
            best_dot = dot;
            best = i;
        }
    }
    best as u32
}

/// Keeps three significant digits so nearby density values share one
/// cache entry.
fn round_sig3(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let e = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(2 - e);
    (x * scale).round() / scale
}

/// Quadrature nodes and weights over one face: exact for the point and
/// segment cases, fan-of-triangles with a fourth-order tensor rule for
/// polygons. Weights sum to the face area.
pub(super) fn face_quadrature(face: &Face) -> Vec<(Vec<f64>, f64)> {
    let verts = face.vertices();
    match face.dim() {
        1 => vec![(verts[0].clone(), 1.0)],
        2 => {
            let half = face.area() / 2.0;
            let mid = [
                0.5 * (verts[0][0] + verts[1][0]),
                0.5 * (verts[0][1] + verts[1][1]),
            ];
            let dir = [
                0.5 * (verts[1][0] - verts[0][0]),
                0.5 * (verts[1][1] - verts[0][1]),
            ];
            GL4_NODES
                .iter()
                .zip(&GL4_WEIGHTS)
                .map(|(&t, &w)| {
                    (vec![mid[0] + t * dir[0], mid[1] + t * dir[1]], w * half)
                })
                .collect()
        }
        3 => {
            let mut out = Vec::new();
            for tri in 1..verts.len() - 1 {
                let (p0, p1, p2) = (&verts[0], &verts[tri], &verts[tri + 1]);
                let e1 = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]];
                let e2 = [p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]];
                let cx = e1[1] * e2[2] - e1[2] * e2[1];
                let cy = e1[2] * e2[0] - e1[0] * e2[2];
                let cz = e1[0] * e2[1] - e1[1] * e2[0];
                let area = 0.5 * (cx * cx + cy * cy + cz * cz).sqrt();
                if area <= 0.0 {
                    continue;
                }
                // Collapsed-square map onto the triangle; the (1 - u)
                // factor is the Jacobian of the collapse.
                for (&xi, &wx) in GL4_NODES.iter().zip(&GL4_WEIGHTS) {
                    let u = 0.5 * (xi + 1.0);
                    for (&zeta, &wz) in GL4_NODES.iter().zip(&GL4_WEIGHTS) {
                        let v = 0.5 * (zeta + 1.0);
                        let l1 = u;
                        let l2 = v * (1.0 - u);
                        let l0 = 1.0 - l1 - l2;
                        let x = vec![
                            l0 * p0[0] + l1 * p1[0] + l2 * p2[0],
                            l0 * p0[1] + l1 * p1[1] + l2 * p2[1],
                            l0 * p0[2] + l1 * p1[2] + l2 * p2[2],
                        ];
                        out.push((x, wx * wz * area * (1.0 - u) / 2.0));
                    }
                }
            }
            out
        }
        _ => unreachable!("faces are validated to dimension <= 3"),
    }
}

type SigmaCache = Mutex<HashMap<(u64, u32), f64>>;

fn sigma_at(
    cache: &SigmaCache,
    table: &[Vec<f64>],
    rho_x: f64,
    dir_idx: u32,
    kernel: &Kernel,
    potential: &Potential,
    p: f64,
    opts: &ProfileOptions,
) -> Result<f64> {
    let key = (rho_x.to_bits(), dir_idx);
    if let Some(&v) = cache.lock().unwrap().get(&key) {
        return Ok(v);
    }
    let sigma = cell_sigma(rho_x, &table[dir_idx as usize], kernel, potential, p, opts)?
        .value();
    cache.lock().unwrap().insert(key, sigma);
    Ok(sigma)
}

/// Integrates `sigma(rho(x), nu) * rho(x)` over the interface.
pub fn g_infinity_energy(
    interface: &PolyhedralInterface,
    rho: &Density,
    kernel: &Kernel,
    potential: &Potential,
    p: f64,
    opts: &ProfileOptions,
) -> Result<f64> {
    let dim = interface.dim();
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho.dim() });
    }
    if kernel.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: kernel.dim() });
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid("exponent must be finite and >= 1"));
    }
    let table = direction_table(dim);
    let cache: SigmaCache = Mutex::new(HashMap::new());

    let face_totals = interface
        .faces()
        .par_iter()
        .map(|face| {
            let dir_idx = snap_direction(&table, face.normal());
            let mut acc = ExactSum::new();
            for (x, w) in face_quadrature(face) {
                if !rho.bounding_box().contains(&x) {
                    return Err(Error::invalid(
                        "interface face leaves the density's bounding box",
                    ));
                }
                let rx = rho.eval(&x);
                if rx <= 0.0 {
                    continue;
                }
                let sigma = sigma_at(
                    &cache,
                    &table,
                    round_sig3(rx),
                    dir_idx,
                    kernel,
                    potential,
                    p,
                    opts,
                )?;
                acc.add(w * sigma * rx);
            }
            Ok(acc.value())
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut total = ExactSum::new();
    for v in face_totals {
        total.add(v);
    }
    Ok(total.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::BoxDomain;
    use crate::kernel::KernelShape;

    fn ball2() -> Kernel {
        Kernel::new(KernelShape::BallIndicator { radius: 1.0 }, 2).unwrap()
    }

    fn segment(x: f64, y0: f64, y1: f64) -> Face {
        Face::new(vec![vec![x, y0], vec![x, y1]], vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn quadrature_weights_sum_to_the_face_area() {
        let seg = segment(0.5, 0.2, 0.8);
        let total: f64 = face_quadrature(&seg).iter().map(|(_, w)| w).sum();
        assert!((total - seg.area()).abs() < 1e-12);

        let tri = Face::new(
            vec![
                vec![0.0, 0.0, 0.3],
                vec![1.0, 0.0, 0.3],
                vec![0.0, 1.0, 0.3],
            ],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        let total: f64 = face_quadrature(&tri).iter().map(|(_, w)| w).sum();
        assert!((total - 0.5).abs() < 1e-12);
        assert!(face_quadrature(&tri).iter().all(|(_, w)| *w >= 0.0));
    }

    #[test]
    fn single_face_matches_a_direct_tension_solve() {
        let opts = ProfileOptions::default();
        let rho = Density::uniform(BoxDomain::unit_cube(2));
        let iface = PolyhedralInterface::new(vec![segment(0.5, 0.2, 0.8)]).unwrap();
        let got = g_infinity_energy(&iface, &rho, &ball2(), &Potential::quartic(), 2.0, &opts)
            .unwrap();
        let sigma = cell_sigma(1.0, &[1.0, 0.0], &ball2(), &Potential::quartic(), 2.0, &opts)
            .unwrap()
            .value();
        let want = 0.6 * sigma;
        assert!((got - want).abs() <= 1e-12 * want.max(1.0), "got {got}, want {want}");
    }

    #[test]
    fn faces_contribute_additively() {
        let opts = ProfileOptions::default();
        let rho = Density::uniform(BoxDomain::unit_cube(2));
        let v = Potential::quartic();
        let a = segment(0.3, 0.1, 0.5);
        let b = segment(0.7, 0.4, 0.9);
        let both = PolyhedralInterface::new(vec![a.clone(), b.clone()]).unwrap();
        let only_a = PolyhedralInterface::new(vec![a]).unwrap();
        let only_b = PolyhedralInterface::new(vec![b]).unwrap();
        let ga = g_infinity_energy(&only_a, &rho, &ball2(), &v, 2.0, &opts).unwrap();
        let gb = g_infinity_energy(&only_b, &rho, &ball2(), &v, 2.0, &opts).unwrap();
        let gab = g_infinity_energy(&both, &rho, &ball2(), &v, 2.0, &opts).unwrap();
        assert!((gab - (ga + gb)).abs() < 1e-12);
    }

    #[test]
    fn tension_is_isotropic_for_the_ball_kernel() {
        let opts = ProfileOptions::default();
        let rho = Density::uniform(BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap());
        let v = Potential::quartic();
        let mut per_unit = Vec::new();
        for k in 0..8 {
            let angle = 0.11 + 0.77 * k as f64;
            let (nx, ny) = (angle.cos(), angle.sin());
            // Unit-length segment through the origin, normal (nx, ny).
            let t = [-ny, nx];
            let face = Face::new(
                vec![
                    vec![-0.5 * t[0], -0.5 * t[1]],
                    vec![0.5 * t[0], 0.5 * t[1]],
                ],
                vec![nx, ny],
            )
            .unwrap();
            let iface = PolyhedralInterface::new(vec![face]).unwrap();
            let g = g_infinity_energy(&iface, &rho, &ball2(), &v, 2.0, &opts).unwrap();
            per_unit.push(g / rho.eval(&[0.0, 0.0]).powi(2));
        }
        let lo = per_unit.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = per_unit.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (hi - lo) <= 0.02 * lo,
            "anisotropy spread {lo}..{hi} exceeds two percent"
        );
    }

    #[test]
    fn faces_outside_the_density_box_are_rejected() {
        let opts = ProfileOptions::default();
        let rho = Density::uniform(BoxDomain::unit_cube(2));
        let iface = PolyhedralInterface::new(vec![segment(1.5, 0.2, 0.8)]).unwrap();
        let got = g_infinity_energy(&iface, &rho, &ball2(), &Potential::quartic(), 2.0, &opts);
        assert!(got.is_err());
    }

    #[test]
    fn sig3_rounding_keys_are_stable() {
        assert_eq!(round_sig3(1.0), 1.0);
        assert_eq!(round_sig3(0.123449), 0.123);
        assert_eq!(round_sig3(12349.0), 12300.0);
        assert_eq!(round_sig3(0.0), 0.0);
        assert_eq!(round_sig3(-0.123449), -0.123);
    }
}
