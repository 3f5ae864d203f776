//! $TL^p$ optimal-transport distances between labeled point sets.
//!
//! Everything here is solved exactly with combinatorial algorithms
//! (sorted 1-D sweep, dense assignment, successive-shortest-path flow,
//! bottleneck matching). No entropic regularization: the distances feed
//! convergence diagnostics where a regularization bias would drown the
//! signal being measured.

mod assignment;
mod bottleneck;
mod mincost;
mod semidiscrete;
mod sorted1d;

pub use semidiscrete::{rate_diagnostic, transport_map_to_samples, CellMap, RateRow};

use crate::cloud::{LabelField, PointCloud};
use crate::error::{Error, Result};
use crate::util::exact_sum;
use crate::util::geom;
use std::io::Write;

/// Combined support size accepted by `ot_distance_p` and `tlp_distance`.
pub const EXACT_PAIR_BUDGET: usize = 4000;

/// Per-side support size accepted by `ot_distance_inf`.
pub const BOTTLENECK_BUDGET: usize = 2000;

/// Maximum number of quadrature cells in `transport_map_to_samples`.
pub const MAP_BUDGET: usize = 16384;

const MASS_SUM_TOL: f64 = 1e-12;

/// Marginal slack accepted when auditing a finished [`TransportPlan`].
pub const MARGINAL_TOL: f64 = 1e-9;

/// A finitely supported probability measure: points plus masses.
#[derive(Debug, Clone)]
pub struct WeightedPointSet {
    points: PointCloud,
    masses: Vec<f64>,
    uniform: bool,
}

impl WeightedPointSet {
    /// Builds a measure from explicit masses. The masses must be
    /// nonnegative and sum to one within `1e-12`.
    pub fn new(points: PointCloud, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != points.len() {
            return Err(Error::SizeMismatch {
                context: "point set masses",
                expected: points.len(),
                got: masses.len(),
            });
        }
        if masses.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::invalid("masses must be finite and nonnegative"));
        }
        let total = exact_sum(&masses);
        if (total - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::invalid(format!(
                "masses must sum to 1 within {MASS_SUM_TOL:e}, got {total}"
            )));
        }
        let w = 1.0 / points.len() as f64;
        let uniform = masses.iter().all(|&m| m == w);
        Ok(Self { points, masses, uniform })
    }

    /// Empirical measure: every point carries mass `1/n`.
    pub fn uniform(points: PointCloud) -> Result<Self> {
        let n = points.len();
        let masses = vec![1.0 / n as f64; n];
        Self::new(points, masses)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn points(&self) -> &PointCloud {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.point(i)
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// True when every mass is exactly `1/n` (the empirical case).
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }
}

/// A sparse coupling between two weighted point sets, along with the
/// distance value it certifies.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// `(a, b, mass)` triples, sorted by `a` then `b`. Only strictly
    /// positive masses are stored.
    entries: Vec<(u32, u32, f64)>,
    distance: f64,
    n_left: usize,
    n_right: usize,
}

impl TransportPlan {
    fn new(mut entries: Vec<(u32, u32, f64)>, distance: f64, n_left: usize, n_right: usize) -> Self {
        entries.retain(|e| e.2 > 0.0);
        entries.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        Self { entries, distance, n_left, n_right }
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    /// The distance certified by this plan (already p-rooted).
    pub fn distance(&self) -> f64 {
        self.distance
    }

    fn transposed(&self) -> TransportPlan {
        TransportPlan::new(
            self.entries.iter().map(|&(i, j, m)| (j, i, m)).collect(),
            self.distance,
            self.n_right,
            self.n_left,
        )
    }

    /// Largest absolute deviation between the plan's marginals and the
    /// two input measures. A valid plan stays below [`MARGINAL_TOL`].
    pub fn marginal_error(&self, a: &WeightedPointSet, b: &WeightedPointSet) -> f64 {
        let mut left = vec![0.0f64; self.n_left];
        let mut right = vec![0.0f64; self.n_right];
        for &(i, j, m) in &self.entries {
            left[i as usize] += m;
            right[j as usize] += m;
        }
        let mut worst = 0.0f64;
        for (i, &m) in left.iter().enumerate() {
            worst = worst.max((m - a.mass(i)).abs());
        }
        for (j, &m) in right.iter().enumerate() {
            worst = worst.max((m - b.mass(j)).abs());
        }
        worst
    }

    /// Writes the coupling as CSV lines `a,b,mass`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "a,b,mass")?;
        for &(i, j, m) in &self.entries {
            writeln!(out, "{i},{j},{m}")?;
        }
        Ok(())
    }
}

fn check_pair(a: &WeightedPointSet, b: &WeightedPointSet) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let combined = a.len() + b.len();
    if combined > EXACT_PAIR_BUDGET {
        return Err(Error::BudgetExceeded {
            context: "exact transport support",
            size: combined,
            budget: EXACT_PAIR_BUDGET,
        });
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::invalid(format!("transport exponent must be finite and >= 1, got {p}")));
    }
    Ok(())
}

/// The assignment and flow solvers break ties in ways that are not
/// symmetric in their two arguments, so symmetric calls are mapped onto
/// one fixed orientation; that makes dist(a, b) == dist(b, a) hold to
/// the last bit instead of merely up to solver round-off.
fn canonical_swap(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    ua: Option<&LabelField>,
    ub: Option<&LabelField>,
) -> bool {
    use std::cmp::Ordering;
    let mut ord = a.len().cmp(&b.len());
    if ord == Ordering::Equal {
        'points: for i in 0..a.len() {
            for k in 0..a.dim() {
                ord = a.point(i)[k].to_bits().cmp(&b.point(i)[k].to_bits());
                if ord != Ordering::Equal {
                    break 'points;
                }
            }
        }
    }
    if ord == Ordering::Equal {
        for i in 0..a.len() {
            ord = a.mass(i).to_bits().cmp(&b.mass(i).to_bits());
            if ord != Ordering::Equal {
                break;
            }
        }
    }
    if ord == Ordering::Equal {
        if let (Some(u), Some(v)) = (ua, ub) {
            for i in 0..u.len() {
                ord = u.values()[i].to_bits().cmp(&v.values()[i].to_bits());
                if ord != Ordering::Equal {
                    break;
                }
            }
        }
    }
    ord == Ordering::Greater
}

/// Optimal-transport distance of order `p` between two weighted point
/// sets, with the optimal coupling.
///
/// Routing: one-dimensional inputs go through the sorted sweep, uniform
/// measures of equal size through dense assignment, everything else
/// through successive-shortest-path min-cost flow. All three are exact,
/// so the choice only affects speed.
pub fn ot_distance_p(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    p: f64,
) -> Result<(f64, TransportPlan)> {
    check_pair(a, b)?;
    check_p(p)?;
    if canonical_swap(a, b, None, None) {
        let (d, plan) = ot_distance_p(b, a, p)?;
        return Ok((d, plan.transposed()));
    }
    let cost = |i: usize, j: usize| crate::energy::pow_p(geom::dist(a.point(i), b.point(j)), p);
    let (total, entries) = if a.dim() == 1 {
        sorted1d::solve(a, b, p)?
    } else if a.is_uniform() && b.is_uniform() && a.len() == b.len() {
        let (perm, total) = assignment::solve(a.len(), &cost);
        let w = 1.0 / a.len() as f64;
        let entries: Vec<_> =
            perm.iter().enumerate().map(|(i, &j)| (i as u32, j as u32, w)).collect();
        (total * w, entries)
    } else {
        mincost::solve(a.masses(), b.masses(), &cost)?
    };
    let distance = total.max(0.0).powf(1.0 / p);
    Ok((distance, TransportPlan::new(entries, distance, a.len(), b.len())))
}

/// Bottleneck (infinity-order) transport distance between two uniform
/// measures of the same size: the smallest `t` such that a perfect
/// matching exists using only pairs at distance `<= t`.
pub fn ot_distance_inf(a: &WeightedPointSet, b: &WeightedPointSet) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    if !(a.is_uniform() && b.is_uniform() && a.len() == b.len()) {
        return Err(Error::invalid(
            "infinity-order distance requires uniform measures of equal size",
        ));
    }
    if a.len() > BOTTLENECK_BUDGET {
        return Err(Error::BudgetExceeded {
            context: "bottleneck matching",
            size: a.len(),
            budget: BOTTLENECK_BUDGET,
        });
    }
    bottleneck::solve(a.len(), &|i, j| geom::dist(a.point(i), b.point(j)))
}

/// $TL^p$ distance between two labeled measures. The ground cost adds
/// the label discrepancy to the spatial one:
/// `|x - y|^p + |u(x) - v(y)|^p`.
pub fn tlp_distance(
    a: &WeightedPointSet,
    u: &LabelField,
    b: &WeightedPointSet,
    v: &LabelField,
    p: f64,
) -> Result<f64> {
    check_pair(a, b)?;
    check_p(p)?;
    if u.len() != a.len() {
        return Err(Error::SizeMismatch {
            context: "left label field",
            expected: a.len(),
            got: u.len(),
        });
    }
    if v.len() != b.len() {
        return Err(Error::SizeMismatch {
            context: "right label field",
            expected: b.len(),
            got: v.len(),
        });
    }
    if canonical_swap(a, b, Some(u), Some(v)) {
        return tlp_distance(b, v, a, u, p);
    }
    let uu = u.values();
    let vv = v.values();
    let cost = |i: usize, j: usize| {
        crate::energy::pow_p(geom::dist(a.point(i), b.point(j)), p)
            + crate::energy::pow_p((uu[i] - vv[j]).abs(), p)
    };
    let total = if a.is_uniform() && b.is_uniform() && a.len() == b.len() {
        let w = 1.0 / a.len() as f64;
        assignment::solve(a.len(), &cost).1 * w
    } else {
        mincost::solve(a.masses(), b.masses(), &cost)?.0
    };
    Ok(total.max(0.0).powf(1.0 / p))
}
