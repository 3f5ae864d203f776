//! Approximate semidiscrete transport: a density is discretized into
//! equal-mass cells, the cells are assigned to sample points with a
//! capacity per sample, and the resulting piecewise-constant map stands
//! in for the true transport map. The reported displacement adds the
//! cell diameter so the number stays an upper bound on the quantity it
//! approximates.

use super::MAP_BUDGET;
use crate::cloud::PointCloud;
use crate::density::Density;
use crate::error::{Error, Result};
use crate::util::geom;
use crate::util::{mix_seed, ExactSum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Default number of cells per sample in the discretization.
pub const DEFAULT_CELLS_PER_SAMPLE: usize = 16;

const SPLIT_ITERS: usize = 50;
const MASS_QUAD_PER_AXIS: usize = 6;

/// A piecewise-constant transport map from a density to a point cloud:
/// every cell of an equal-mass partition is sent to one sample.
#[derive(Debug, Clone)]
pub struct CellMap {
    cell_centers: PointCloud,
    assignment: Vec<u32>,
    n_samples: usize,
    m_per: usize,
    sup_displacement: f64,
    max_cell_diameter: f64,
}

impl CellMap {
    pub fn n_cells(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn m_per(&self) -> usize {
        self.m_per
    }

    /// Centers of the equal-mass cells, in split order.
    pub fn cell_centers(&self) -> &PointCloud {
        &self.cell_centers
    }

    /// Mass carried by each cell.
    pub fn cell_mass(&self) -> f64 {
        1.0 / self.assignment.len() as f64
    }

    /// Sample index that cell `k` is sent to.
    pub fn apply(&self, k: usize) -> usize {
        self.assignment[k] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        self.assignment.as_slice()
    }

    /// Largest distance from a cell center to its assigned sample.
    pub fn sup_displacement(&self) -> f64 {
        self.sup_displacement
    }

    /// Largest cell diagonal; added to the displacement wherever a bound
    /// on the true map is reported.
    pub fn max_cell_diameter(&self) -> f64 {
        self.max_cell_diameter
    }

    /// Integral of `phi` against the push-forward of the cell measure,
    /// grouped per sample. Because every sample receives exactly
    /// `m_per` cells this equals the empirical mean of `phi` over the
    /// samples, term for term.
    pub fn pushforward_integral(
        &self,
        samples: &PointCloud,
        mut phi: impl FnMut(&[f64]) -> f64,
    ) -> f64 {
        let n_cells = self.assignment.len() as f64;
        let mut counts = vec![0u32; self.n_samples];
        for &s in &self.assignment {
            counts[s as usize] += 1;
        }
        let mut total = ExactSum::new();
        for (i, &c) in counts.iter().enumerate() {
            total.add(c as f64 / n_cells * phi(samples.point(i)));
        }
        total.value()
    }
}

/// Discretizes `rho` into `cloud.len() * m_per` equal-mass cells and
/// assigns them to the samples, `m_per` cells each, minimizing total
/// Euclidean displacement.
pub fn transport_map_to_samples(
    rho: &Density,
    cloud: &PointCloud,
    m_per: usize,
) -> Result<CellMap> {
    if m_per == 0 {
        return Err(Error::invalid("cells per sample must be at least 1"));
    }
    if rho.dim() != cloud.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: cloud.dim() });
    }
    let n = cloud.len();
    let n_cells = n
        .checked_mul(m_per)
        .ok_or_else(|| Error::invalid("cell count overflow"))?;
    if n_cells > MAP_BUDGET {
        return Err(Error::BudgetExceeded {
            context: "transport map cells",
            size: n_cells,
            budget: MAP_BUDGET,
        });
    }

    let dim = rho.dim();
    let bb = rho.bounding_box();
    let mut cells = Vec::with_capacity(n_cells);
    split_equal_mass(rho, bb.lo().to_vec(), bb.hi().to_vec(), n_cells, &mut cells);
    debug_assert_eq!(cells.len(), n_cells);

    let mut centers = Vec::with_capacity(n_cells * dim);
    let mut max_diam2 = 0.0f64;
    for (lo, hi) in &cells {
        let mut diag2 = 0.0;
        for k in 0..dim {
            centers.push(0.5 * (lo[k] + hi[k]));
            diag2 += (hi[k] - lo[k]) * (hi[k] - lo[k]);
        }
        max_diam2 = max_diam2.max(diag2);
    }
    let cell_centers = PointCloud::from_flat(dim, centers)?;

    let assignment = assign_with_capacity(&cell_centers, cloud, m_per)?;
    let mut sup = 0.0f64;
    for (k, &s) in assignment.iter().enumerate() {
        sup = sup.max(geom::dist(cell_centers.point(k), cloud.point(s as usize)));
    }
    Ok(CellMap {
        cell_centers,
        assignment,
        n_samples: n,
        m_per,
        sup_displacement: sup,
        max_cell_diameter: max_diam2.sqrt(),
    })
}

/// Recursively halves the box into `count` cells of (approximately)
/// equal mass under `rho`. The cut runs along the longest axis; the cut
/// position comes from bisection on the quadrature mass.
fn split_equal_mass(
    rho: &Density,
    lo: Vec<f64>,
    hi: Vec<f64>,
    count: usize,
    out: &mut Vec<(Vec<f64>, Vec<f64>)>,
) {
    if count == 1 {
        out.push((lo, hi));
        return;
    }
    let dim = lo.len();
    let mut axis = 0;
    for k in 1..dim {
        if hi[k] - lo[k] > hi[axis] - lo[axis] {
            axis = k;
        }
    }
    let left_count = count / 2;
    let frac = left_count as f64 / count as f64;
    let total = box_mass(rho, &lo, &hi);

    let cut = if total > 0.0 {
        let target = frac * total;
        let (mut a, mut b) = (lo[axis], hi[axis]);
        for _ in 0..SPLIT_ITERS {
            let mid = 0.5 * (a + b);
            let mut hi_left = hi.clone();
            hi_left[axis] = mid;
            if box_mass(rho, &lo, &hi_left) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    } else {
        // Nothing lives here; fall back to an equal-volume cut so the
        // partition stays well formed.
        lo[axis] + frac * (hi[axis] - lo[axis])
    };

    let mut hi_left = hi.clone();
    hi_left[axis] = cut;
    let mut lo_right = lo.clone();
    lo_right[axis] = cut;
    split_equal_mass(rho, lo, hi_left, left_count, out);
    split_equal_mass(rho, lo_right, hi, count - left_count, out);
}

/// Midpoint-rule mass of `rho` over a sub-box. Exact for densities that
/// are constant on the sub-box, which covers the uniform case the rate
/// diagnostic runs on.
fn box_mass(rho: &Density, lo: &[f64], hi: &[f64]) -> f64 {
    let dim = lo.len();
    let q = MASS_QUAD_PER_AXIS;
    let mut vol = 1.0;
    for k in 0..dim {
        vol *= hi[k] - lo[k];
    }
    if vol <= 0.0 {
        return 0.0;
    }
    let mut sum = ExactSum::new();
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0f64; dim];
    let nodes = q.pow(dim as u32);
    for _ in 0..nodes {
        for k in 0..dim {
            x[k] = lo[k] + (idx[k] as f64 + 0.5) / q as f64 * (hi[k] - lo[k]);
        }
        sum.add(rho.eval(&x));
        let mut k = 0;
        while k < dim {
            idx[k] += 1;
            if idx[k] < q {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
    sum.value() * vol / nodes as f64
}

#[derive(PartialEq)]
struct HeapItem(f64, u32);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Unit-supply min-cost flow: each cell must go to some sample, each
/// sample takes at most `m_per` cells, total displacement minimal.
/// Flows are integral so the loop runs exactly one phase per cell.
fn assign_with_capacity(
    cells: &PointCloud,
    samples: &PointCloud,
    m_per: usize,
) -> Result<Vec<u32>> {
    let nc = cells.len();
    let ns = samples.len();
    let n = nc + ns;
    let cost = |c: usize, s: usize| geom::dist(cells.point(c), samples.point(s));

    let mut assigned = vec![u32::MAX; nc];
    let mut free_cap = vec![m_per as u32; ns];
    // Cells currently parked at each sample; entries go stale after a
    // reassignment and are skipped (checked against `assigned`).
    let mut parked: Vec<Vec<u32>> = vec![Vec::new(); ns];
    let mut pot = vec![0.0f64; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];

    for _phase in 0..nc {
        dist.fill(f64::INFINITY);
        pred.fill(usize::MAX);
        done.fill(false);
        let mut heap = BinaryHeap::new();
        for (c, &a) in assigned.iter().enumerate() {
            if a == u32::MAX {
                dist[c] = 0.0;
                heap.push(Reverse(HeapItem(0.0, c as u32)));
            }
        }

        let mut target = usize::MAX;
        while let Some(Reverse(HeapItem(d, node))) = heap.pop() {
            let node = node as usize;
            if done[node] || d > dist[node] {
                continue;
            }
            done[node] = true;
            if node >= nc && free_cap[node - nc] > 0 {
                target = node;
                break;
            }
            if node < nc {
                for s in 0..ns {
                    let v = nc + s;
                    if done[v] {
                        continue;
                    }
                    let rc = (cost(node, s) + pot[node] - pot[v]).max(0.0);
                    if d + rc < dist[v] {
                        dist[v] = d + rc;
                        pred[v] = node;
                        heap.push(Reverse(HeapItem(dist[v], v as u32)));
                    }
                }
            } else {
                let s = node - nc;
                parked[s].retain(|&c| assigned[c as usize] == s as u32);
                for &c in &parked[s] {
                    let c = c as usize;
                    if done[c] {
                        continue;
                    }
                    let rc = (-cost(c, s) + pot[node] - pot[c]).max(0.0);
                    if d + rc < dist[c] {
                        dist[c] = d + rc;
                        pred[c] = node;
                        heap.push(Reverse(HeapItem(dist[c], c as u32)));
                    }
                }
            }
        }
        if target == usize::MAX {
            return Err(Error::Numerical(
                "capacitated assignment could not place every cell".into(),
            ));
        }

        let d_target = dist[target];
        for v in 0..n {
            pot[v] += dist[v].min(d_target);
        }

        // Flip assignments along the augmenting path.
        let mut v = target;
        loop {
            let c = pred[v];
            let s = (v - nc) as u32;
            let came_from = pred[c];
            assigned[c] = s;
            parked[v - nc].push(c as u32);
            if came_from == usize::MAX {
                break;
            }
            v = came_from;
        }
        free_cap[target - nc] -= 1;
    }
    Ok(assigned)
}

/// One row of the convergence-rate table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RateRow {
    pub n: usize,
    pub delta: f64,
    pub ratios: Vec<f64>,
    pub median: f64,
    pub max: f64,
}

/// Reference rate for the sup-norm displacement of the sample transport
/// map at sample count `n` in dimension `d`. Needs `n >= 3` so the
/// iterated logarithm is positive.
pub fn delta_n(d: usize, n: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if n < 3 {
        return Err(Error::invalid(format!("rate reference needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    Ok(match d {
        1 => (nf.ln().ln() / nf).sqrt(),
        2 => nf.ln().powf(0.75) / nf.sqrt(),
        _ => (nf.ln() / nf).powf(1.0 / d as f64),
    })
}

/// Empirical `sup |T_n - Id| / delta_n` statistics for uniform samples
/// on the unit box. Trials are independent and individually seeded, so
/// the table does not depend on thread count.
pub fn rate_diagnostic(
    dim: usize,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<RateRow>> {
    if trials == 0 {
        return Err(Error::EmptyInput("trial count"));
    }
    let rho = Density::uniform(crate::density::BoxDomain::unit_cube(dim));
    // The assignment solver runs one augmentation phase per cell over
    // cells*samples arcs, so large tables want far fewer cells than the
    // general map budget allows. The diagnostic only needs the rate's
    // order; the added cell diameter keeps the estimate an upper bound.
    const RATE_CELL_BUDGET: usize = 1024;
    let cell_budget = MAP_BUDGET.min(RATE_CELL_BUDGET);
    let mut rows = Vec::with_capacity(n_list.len());
    for (ni, &n) in n_list.iter().enumerate() {
        let delta = delta_n(dim, n)?;
        let mut m_per = DEFAULT_CELLS_PER_SAMPLE;
        while m_per > 1 && n * m_per > cell_budget {
            m_per /= 2;
        }
        let ratios: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(mix_seed(seed, ni as u64, t as u64));
                let cloud = rho.sample(n, &mut rng)?;
                let map = transport_map_to_samples(&rho, &cloud, m_per)?;
                Ok((map.sup_displacement() + map.max_cell_diameter()) / delta)
            })
            .collect::<Result<_>>()?;
        let mut sorted = ratios.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        let median = if trials % 2 == 1 {
            sorted[trials / 2]
        } else {
            0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2])
        };
        let max = sorted[trials - 1];
        rows.push(RateRow { n, delta, ratios, median, max });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::BoxDomain;

    fn quantile_cloud(n: usize) -> PointCloud {
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        PointCloud::from_flat(1, xs).unwrap()
    }

    #[test]
    fn single_sample_receives_everything() {
        let rho = Density::uniform(BoxDomain::unit_cube(2));
        let cloud = PointCloud::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let map = transport_map_to_samples(&rho, &cloud, 8).unwrap();
        assert_eq!(map.n_cells(), 8);
        assert!(map.assignment().iter().all(|&s| s == 0));
    }

    #[test]
    fn quantile_midpoints_give_small_sup_displacement() {
        let rho = Density::uniform(BoxDomain::unit_cube(1));
        for &n in &[1usize, 2, 5, 16] {
            let cloud = quantile_cloud(n);
            let map = transport_map_to_samples(&rho, &cloud, 8).unwrap();
            let bound = 1.0 / (2.0 * n as f64) + map.max_cell_diameter();
            assert!(
                map.sup_displacement() <= bound + 1e-9,
                "n={n}: sup {} > bound {bound}",
                map.sup_displacement()
            );
        }
    }

    #[test]
    fn pushforward_identity_is_exact() {
        let rho = Density::uniform(BoxDomain::unit_cube(2));
        let cloud = {
            let mut rng = ChaCha8Rng::seed_from_u64(41);
            rho.sample(13, &mut rng).unwrap()
        };
        let map = transport_map_to_samples(&rho, &cloud, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        use rand::Rng;
        for _ in 0..20 {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            let c: f64 = rng.gen_range(-1.0..1.0);
            let phi = |x: &[f64]| a + b * x[0] + c * x[0] * x[1] + x[1] * x[1];
            let lhs = {
                let w = 1.0 / cloud.len() as f64;
                let mut s = ExactSum::new();
                for i in 0..cloud.len() {
                    s.add(w * phi(cloud.point(i)));
                }
                s.value()
            };
            let rhs = map.pushforward_integral(&cloud, phi);
            assert_eq!(lhs.to_bits(), rhs.to_bits());
        }
    }

    #[test]
    fn every_sample_gets_exactly_m_per_cells() {
        let rho = Density::uniform(BoxDomain::unit_cube(2));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cloud = rho.sample(9, &mut rng).unwrap();
        let map = transport_map_to_samples(&rho, &cloud, 5).unwrap();
        let mut counts = vec![0usize; 9];
        for k in 0..map.n_cells() {
            counts[map.apply(k)] += 1;
        }
        assert!(counts.iter().all(|&c| c == 5));
    }

    #[test]
    fn capacitated_assignment_beats_greedy_when_it_must() {
        // Two cells near one sample; capacity 1 forces the flow to
        // reroute the farther cell, and the optimum sends each cell to
        // a distinct sample with minimal total cost.
        let cells = PointCloud::from_flat(1, vec![0.0, 0.1]).unwrap();
        let samples = PointCloud::from_flat(1, vec![0.05, 1.0]).unwrap();
        let got = assign_with_capacity(&cells, &samples, 1).unwrap();
        // cell 1 (0.1) is closer to 1.0? No: |0.1 - 0.05| = 0.05 vs 0.9.
        // Total options: [0->s0, 1->s1] = 0.05 + 0.9; [0->s1, 1->s0] = 1.0 + 0.05.
        assert_eq!(got, vec![0, 1]);
    }

    #[test]
    fn budget_and_argument_errors() {
        let rho = Density::uniform(BoxDomain::unit_cube(1));
        let cloud = quantile_cloud(2000);
        assert!(matches!(
            transport_map_to_samples(&rho, &cloud, 16),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(transport_map_to_samples(&rho, &cloud, 0).is_err());
        let cloud2 = PointCloud::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            transport_map_to_samples(&rho, &cloud2, 4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn delta_n_formula_values() {
        let d1 = delta_n(1, 256).unwrap();
        let d2 = delta_n(2, 256).unwrap();
        let ln256 = (256.0f64).ln();
        assert_eq!(d1.to_bits(), (ln256.ln() / 256.0).sqrt().to_bits());
        assert_eq!(d2.to_bits(), (ln256.powf(0.75) / 16.0).to_bits());
        let d3 = delta_n(3, 1000).unwrap();
        assert!((d3 - (1000.0f64.ln() / 1000.0).powf(1.0 / 3.0)).abs() < 1e-15);
        assert!(delta_n(0, 10).is_err());
        assert!(delta_n(2, 2).is_err());
    }

    #[test]
    fn rate_rows_are_finite_and_reproducible() {
        let rows = rate_diagnostic(2, &[16, 32], 3, 99).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.median > 0.0 && row.median.is_finite());
            assert!(row.max >= row.median);
            assert_eq!(row.ratios.len(), 3);
        }
        let again = rate_diagnostic(2, &[16, 32], 3, 99).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.median.to_bits(), b.median.to_bits());
            assert_eq!(a.max.to_bits(), b.max.to_bits());
        }
    }
}
