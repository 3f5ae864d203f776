//! Weighted neighborhood graphs W_ij = eps^-d * eta((x_i - x_j)/eps), built
//! either by exact pairwise scan or by uniform grid binning.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use rayon::prelude::*;
use std::collections::HashMap;
use std::io::Write;

/// Relative cutoff under which weights are treated as exact zeros
/// (truncated-Gaussian tails produce denormal noise).
const WEIGHT_DROP: f64 = 1e-14;

/// Node budget for the exact pairwise builder.
const BRUTE_FORCE_LIMIT: usize = 2000;

/// Immutable CSR adjacency. Neighbor lists are sorted by index, weights are
/// symmetric bit-for-bit, and self-loops appear once with weight eta(0)/eps^d.
#[derive(Debug, Clone)]
pub struct SparseGraph {
    n: usize,
    dim: usize,
    eps: f64,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
    kernel: Option<Kernel>,
}

impl SparseGraph {
    pub(crate) fn from_parts(
        n: usize,
        dim: usize,
        eps: f64,
        offsets: Vec<usize>,
        cols: Vec<u32>,
        weights: Vec<f64>,
        kernel: Option<Kernel>,
    ) -> Self {
        debug_assert_eq!(offsets.len(), n + 1);
        debug_assert_eq!(cols.len(), weights.len());
        SparseGraph { n, dim, eps, offsets, cols, weights, kernel }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        self.kernel.as_ref()
    }

    /// Stored (neighbor, weight) entries of node i, sorted by neighbor index.
    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let lo = self.offsets[i];
        let hi = self.offsets[i + 1];
        (&self.cols[lo..hi], &self.weights[lo..hi])
    }

    /// Total stored entries, self-loops included.
    pub fn entry_count(&self) -> usize {
        self.cols.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (cols, w) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => w[k],
            Err(_) => 0.0,
        }
    }

    /// Edge-list CSV: "# n=<n> eps=<eps> d=<d>" header, then i,j,w rows with
    /// i < j (self-loops are implied by the kernel and omitted).
    pub fn write_edge_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n={} eps={} d={}", self.n, self.eps, self.dim)?;
        for i in 0..self.n {
            let (cols, ws) = self.row(i);
            for (c, wt) in cols.iter().zip(ws) {
                if (*c as usize) > i {
                    writeln!(w, "{i},{c},{wt}")?;
                }
            }
        }
        Ok(())
    }
}

fn check_build_inputs(cloud: &PointCloud, kernel: &Kernel, eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be finite and > 0, got {eps}")));
    }
    if kernel.dim() != cloud.dim() {
        return Err(Error::DimensionMismatch { expected: cloud.dim(), got: kernel.dim() });
    }
    if cloud.len() > u32::MAX as usize {
        return Err(Error::invalid("point cloud too large for u32 node indices"));
    }
    Ok(())
}

#[inline]
fn pair_weight(kernel: &Kernel, scale: f64, eps: f64, xi: &[f64], xj: &[f64], z: &mut [f64]) -> f64 {
    for k in 0..z.len() {
        z[k] = (xi[k] - xj[k]) / eps;
    }
    scale * kernel.eval(z)
}

fn rows_to_csr(
    n: usize,
    dim: usize,
    eps: f64,
    kernel: &Kernel,
    rows: Vec<Vec<(u32, f64)>>,
) -> SparseGraph {
    let total: usize = rows.iter().map(Vec::len).sum();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    offsets.push(0);
    for row in rows {
        for (c, w) in row {
            cols.push(c);
            weights.push(w);
        }
        offsets.push(cols.len());
    }
    SparseGraph::from_parts(n, dim, eps, offsets, cols, weights, Some(kernel.clone()))
}

/// Exact O(n^2) construction. Kept public as the oracle the binned builder is
/// tested against.
pub fn build_graph_bruteforce(cloud: &PointCloud, kernel: &Kernel, eps: f64) -> Result<SparseGraph> {
    check_build_inputs(cloud, kernel, eps)?;
    let n = cloud.len();
    let d = cloud.dim();
    let scale = eps.powi(-(d as i32));
    let drop = WEIGHT_DROP * scale;
    let rows: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut z = vec![0.0; d];
            let xi = cloud.point(i);
            let mut row = Vec::new();
            for j in 0..n {
                let w = pair_weight(kernel, scale, eps, xi, cloud.point(j), &mut z);
                if w >= drop {
                    row.push((j as u32, w));
                }
            }
            row
        })
        .collect();
    Ok(rows_to_csr(n, d, eps, kernel, rows))
}

/// Grid-binned construction: cells a hair wider than the interaction radius,
/// so every interacting pair sits in adjacent cells and the kernel itself
/// decides membership (no distance prefilter, keeping exact agreement with
/// the pairwise oracle).
pub fn build_graph_binned(cloud: &PointCloud, kernel: &Kernel, eps: f64) -> Result<SparseGraph> {
    check_build_inputs(cloud, kernel, eps)?;
    let n = cloud.len();
    let d = cloud.dim();
    let scale = eps.powi(-(d as i32));
    let drop = WEIGHT_DROP * scale;
    let cell = eps * kernel.support_radius() * (1.0 + 1e-9);
    let mut lo = vec![f64::INFINITY; d];
    for p in cloud.iter() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
        }
    }
    let bin_of = |x: &[f64]| -> Vec<i32> {
        (0..d).map(|k| ((x[k] - lo[k]) / cell).floor() as i32).collect()
    };
    let mut bins: HashMap<Vec<i32>, Vec<u32>> = HashMap::new();
    for i in 0..n {
        bins.entry(bin_of(cloud.point(i))).or_default().push(i as u32);
    }
    let offsets_3d: Vec<Vec<i32>> = {
        let mut offs = Vec::new();
        let shape = vec![3usize; d];
        crate::util::for_each_multi_index(&shape, |idx| {
            offs.push(idx.iter().map(|&v| v as i32 - 1).collect());
        });
        offs
    };
    let rows: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = cloud.point(i);
            let home = bin_of(xi);
            let mut z = vec![0.0; d];
            let mut cand: Vec<u32> = Vec::new();
            let mut key = vec![0i32; d];
            for off in &offsets_3d {
                for k in 0..d {
                    key[k] = home[k] + off[k];
                }
                if let Some(members) = bins.get(&key) {
                    cand.extend_from_slice(members);
                }
            }
            cand.sort_unstable();
            let mut row = Vec::new();
            for j in cand {
                let w = pair_weight(kernel, scale, eps, xi, cloud.point(j as usize), &mut z);
                if w >= drop {
                    row.push((j, w));
                }
            }
            row
        })
        .collect();
    Ok(rows_to_csr(n, d, eps, kernel, rows))
}

/// Builds the similarity graph, choosing the pairwise scan for small clouds
/// and grid binning above that.
pub fn build_graph(cloud: &PointCloud, kernel: &Kernel, eps: f64) -> Result<SparseGraph> {
    if cloud.len() <= BRUTE_FORCE_LIMIT {
        build_graph_bruteforce(cloud, kernel, eps)
    } else {
        build_graph_binned(cloud, kernel, eps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityReport {
    pub components: usize,
    /// Component sizes, largest first.
    pub sizes: Vec<usize>,
}

pub fn connectivity_report(g: &SparseGraph) -> ConnectivityReport {
    let n = g.n();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for i in 0..n {
        let (cols, _) = g.row(i);
        for &j in cols {
            let a = find(&mut parent, i as u32);
            let b = find(&mut parent, j);
            if a != b {
                parent[a as usize] = b;
            }
        }
    }
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for i in 0..n as u32 {
        let r = find(&mut parent, i);
        *counts.entry(r).or_insert(0) += 1;
    }
    let mut sizes: Vec<usize> = counts.into_values().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ConnectivityReport { components: sizes.len(), sizes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelShape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ball(radius: f64, dim: usize) -> Kernel {
        Kernel::new(KernelShape::BallIndicator { radius }, dim).unwrap()
    }

    #[test]
    fn weight_examples() {
        let cloud = PointCloud::from_rows(&[vec![0.0, 0.0], vec![0.3, 0.0]]).unwrap();
        let g = build_graph(&cloud, &ball(1.0, 2), 0.5).unwrap();
        assert_eq!(g.weight(0, 1), 4.0);
        assert_eq!(g.weight(0, 0), 4.0); // self-loop eta(0)/eps^2

        let far = PointCloud::from_rows(&[vec![0.0, 0.0], vec![0.6, 0.0]]).unwrap();
        let g2 = build_graph(&far, &ball(1.0, 2), 0.5).unwrap();
        assert_eq!(g2.weight(0, 1), 0.0);

        let line = PointCloud::from_rows(&[vec![0.0], vec![0.1]]).unwrap();
        let kg = Kernel::new(
            KernelShape::TruncatedGaussian { bandwidth: 1.0, cutoff: 2.0 },
            1,
        )
        .unwrap();
        let g3 = build_graph(&line, &kg, 0.1).unwrap();
        assert!((g3.weight(0, 1) - 10.0 * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn adjacency_is_symmetric_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> =
            (0..300).map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let g = build_graph(&cloud, &ball(1.0, 2), 0.15).unwrap();
        for i in 0..g.n() {
            let (cols, ws) = g.row(i);
            for (c, w) in cols.iter().zip(ws) {
                let back = g.weight(*c as usize, i);
                assert_eq!(w.to_bits(), back.to_bits(), "asymmetry at ({i},{c})");
            }
        }
    }

    #[test]
    fn binned_matches_bruteforce_edge_for_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in [1usize, 2, 3] {
            let n = 400;
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
            let cloud = PointCloud::from_rows(&rows).unwrap();
            let kernel = Kernel::new(
                KernelShape::TruncatedGaussian { bandwidth: 0.6, cutoff: 1.8 },
                d,
            )
            .unwrap();
            let eps = 0.17;
            let a = build_graph_bruteforce(&cloud, &kernel, eps).unwrap();
            let b = build_graph_binned(&cloud, &kernel, eps).unwrap();
            assert_eq!(a.offsets, b.offsets, "d={d}");
            assert_eq!(a.cols, b.cols, "d={d}");
            let wa: Vec<u64> = a.weights.iter().map(|w| w.to_bits()).collect();
            let wb: Vec<u64> = b.weights.iter().map(|w| w.to_bits()).collect();
            assert_eq!(wa, wb, "d={d}");
        }
    }

    #[test]
    fn doubling_eps_scales_indicator_weights_by_2_pow_minus_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 2usize;
        let rows: Vec<Vec<f64>> =
            (0..200).map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let k = ball(1.0, d);
        let g1 = build_graph(&cloud, &k, 0.1).unwrap();
        let g2 = build_graph(&cloud, &k, 0.2).unwrap();
        // every surviving g1 edge survives in g2 with exactly 1/4 the weight
        for i in 0..g1.n() {
            let (cols, ws) = g1.row(i);
            for (c, w) in cols.iter().zip(ws) {
                let w2 = g2.weight(*c as usize, i);
                assert_eq!(w2, w * 0.25, "edge ({i},{c})");
            }
        }
    }

    #[test]
    fn two_separated_clusters_are_two_components() {
        let mut rows = Vec::new();
        for i in 0..20 {
            rows.push(vec![0.01 * i as f64, 0.0]);
            rows.push(vec![5.0 + 0.01 * i as f64, 0.0]);
        }
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let g = build_graph(&cloud, &ball(1.0, 2), 0.5).unwrap();
        let rep = connectivity_report(&g);
        assert_eq!(rep.components, 2);
        assert_eq!(rep.sizes, vec![20, 20]);
    }

    #[test]
    fn edge_csv_has_header_and_upper_triangle() {
        let cloud =
            PointCloud::from_rows(&[vec![0.0, 0.0], vec![0.1, 0.0], vec![0.9, 0.9]]).unwrap();
        let g = build_graph(&cloud, &ball(1.0, 2), 0.5).unwrap();
        let mut buf = Vec::new();
        g.write_edge_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# n=3 eps=0.5 d=2");
        let rest: Vec<&str> = lines.collect();
        assert_eq!(rest, vec![format!("0,1,{}", 4.0).as_str()]);
    }

    #[test]
    fn input_validation() {
        let cloud = PointCloud::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert!(build_graph(&cloud, &ball(1.0, 2), 0.0).is_err());
        assert!(build_graph(&cloud, &ball(1.0, 3), 0.5).is_err());
    }
}
