//! Successive shortest paths for the general (unequal size, nonuniform
//! mass) transport problem.
//!
//! Node potentials keep reduced costs nonnegative so each phase is a
//! plain Dijkstra run, started from every source that still has supply
//! and stopped at the first sink that still wants mass. Flow values are
//! floating point; residues below `SNAP` are flushed to zero so the
//! loop terminates. A phase cap converts pathological rounding into an
//! error instead of a hang.

use crate::error::{Error, Result};
use crate::util::ExactSum;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

const SNAP: f64 = 1e-15;
const REMAINDER_TOL: f64 = 1e-12;

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

pub(super) fn solve(
    supplies: &[f64],
    demands: &[f64],
    cost: &dyn Fn(usize, usize) -> f64,
) -> Result<(f64, Vec<(u32, u32, f64)>)> {
    let ns = supplies.len();
    let nd = demands.len();
    let n = ns + nd;
    let mut supply = supplies.to_vec();
    let mut demand = demands.to_vec();
    let mut flow = vec![0.0f64; ns * nd];
    let mut pot = vec![0.0f64; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];

    let max_phases = 10 * n + 1000;
    let mut phases = 0;
    // Stop once either side is (numerically) exhausted; leftover mass on
    // the other side is rounding residue well inside the marginal slack.
    while supply.iter().sum::<f64>() > REMAINDER_TOL
        && demand.iter().sum::<f64>() > REMAINDER_TOL
    {
        phases += 1;
        if phases > max_phases {
            return Err(Error::Numerical(format!(
                "transport flow failed to settle within {max_phases} phases"
            )));
        }

        dist.fill(f64::INFINITY);
        pred.fill(usize::MAX);
        done.fill(false);
        let mut heap = BinaryHeap::new();
        for (i, &s) in supply.iter().enumerate() {
            if s > 0.0 {
                dist[i] = 0.0;
                heap.push(Reverse(HeapItem(0.0, i as u32)));
            }
        }

        let mut target = usize::MAX;
        while let Some(Reverse(HeapItem(d, node))) = heap.pop() {
            let node = node as usize;
            if done[node] || d > dist[node] {
                continue;
            }
            done[node] = true;
            if node >= ns && demand[node - ns] > 0.0 {
                target = node;
                break;
            }
            if node < ns {
                let i = node;
                for j in 0..nd {
                    let v = ns + j;
                    if done[v] {
                        continue;
                    }
                    let rc = cost(i, j) + pot[i] - pot[v];
                    let nd_ = d + rc.max(0.0);
                    if nd_ < dist[v] {
                        dist[v] = nd_;
                        pred[v] = i;
                        heap.push(Reverse(HeapItem(nd_, v as u32)));
                    }
                }
            } else {
                let j = node - ns;
                for i in 0..ns {
                    if done[i] || flow[i * nd + j] <= 0.0 {
                        continue;
                    }
                    let rc = -cost(i, j) + pot[node] - pot[i];
                    let nd_ = d + rc.max(0.0);
                    if nd_ < dist[i] {
                        dist[i] = nd_;
                        pred[i] = node;
                        heap.push(Reverse(HeapItem(nd_, i as u32)));
                    }
                }
            }
        }
        if target == usize::MAX {
            return Err(Error::Numerical(
                "transport flow ran out of augmenting paths with mass unrouted".into(),
            ));
        }

        let d_target = dist[target];
        for v in 0..n {
            pot[v] += dist[v].min(d_target);
        }

        // Walk back to the root source, find the bottleneck, then push.
        // The path alternates sink <- source (forward arc) and
        // source <- sink (backward arc); only backward arcs and the two
        // endpoints constrain the amount.
        let mut bottleneck = demand[target - ns];
        let mut v = target;
        let root = loop {
            let u = pred[v];
            if v < ns {
                bottleneck = bottleneck.min(flow[v * nd + (u - ns)]);
            }
            if u < ns && pred[u] == usize::MAX {
                bottleneck = bottleneck.min(supply[u]);
                break u;
            }
            v = u;
        };

        let mut w = target;
        while w != root {
            let u = pred[w];
            if w >= ns {
                flow[u * nd + (w - ns)] += bottleneck;
            } else {
                let cell = &mut flow[w * nd + (u - ns)];
                *cell -= bottleneck;
                if *cell < SNAP {
                    *cell = 0.0;
                }
            }
            w = u;
        }
        supply[root] -= bottleneck;
        if supply[root] < SNAP {
            supply[root] = 0.0;
        }
        demand[target - ns] -= bottleneck;
        if demand[target - ns] < SNAP {
            demand[target - ns] = 0.0;
        }
    }

    let mut entries = Vec::new();
    let mut total = ExactSum::new();
    for i in 0..ns {
        for j in 0..nd {
            let m = flow[i * nd + j];
            if m > 0.0 {
                entries.push((i as u32, j as u32, m));
                total.add(m * cost(i, j));
            }
        }
    }
    Ok((total.value(), entries))
}
