//! Bottleneck matching: the smallest distance threshold under which a
//! perfect matching between two equal-size point sets exists.
//!
//! Binary search over the sorted set of realized pairwise distances;
//! each feasibility probe runs Hopcroft-Karp on the thresholded graph.
//! The answer is therefore always one of the actual pair distances.

use crate::error::Result;

pub(super) fn solve(n: usize, dist: &dyn Fn(usize, usize) -> f64) -> Result<f64> {
    let mut d = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = dist(i, j);
        }
    }
    let mut levels: Vec<f64> = d.clone();
    levels.sort_unstable_by(f64::total_cmp);
    levels.dedup();

    // Every row and column must be able to reach something, so the
    // optimum is at least the largest row/column minimum.
    let mut floor = 0.0f64;
    for i in 0..n {
        let row_min = (0..n).map(|j| d[i * n + j]).fold(f64::INFINITY, f64::min);
        let col_min = (0..n).map(|j| d[j * n + i]).fold(f64::INFINITY, f64::min);
        floor = floor.max(row_min).max(col_min);
    }

    let mut lo = levels.partition_point(|&t| t < floor);
    let mut hi = levels.len() - 1;
    debug_assert!(feasible(n, &d, levels[hi]), "full graph always matches");
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(n, &d, levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(levels[lo])
}

/// Does the bipartite graph with edges `d(i, j) <= t` admit a perfect
/// matching? Hopcroft-Karp with BFS layering.
fn feasible(n: usize, d: &[f64], t: f64) -> bool {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if d[i * n + j] <= t {
                adj[i].push(j as u32);
            }
        }
        if adj[i].is_empty() {
            return false;
        }
    }

    const FREE: u32 = u32::MAX;
    let mut match_l = vec![FREE; n];
    let mut match_r = vec![FREE; n];
    let mut layer = vec![u32::MAX; n];
    let mut queue = Vec::with_capacity(n);
    let mut matched = 0usize;

    loop {
        // BFS from free left vertices to build layers.
        queue.clear();
        for i in 0..n {
            if match_l[i] == FREE {
                layer[i] = 0;
                queue.push(i as u32);
            } else {
                layer[i] = u32::MAX;
            }
        }
        let mut reached_free = false;
        let mut head = 0;
        while head < queue.len() {
            let i = queue[head] as usize;
            head += 1;
            for &j in &adj[i] {
                let m = match_r[j as usize];
                if m == FREE {
                    reached_free = true;
                } else if layer[m as usize] == u32::MAX {
                    layer[m as usize] = layer[i] + 1;
                    queue.push(m);
                }
            }
        }
        if !reached_free {
            break;
        }
        for i in 0..n {
            if match_l[i] == FREE && augment(i, &adj, &mut match_l, &mut match_r, &mut layer) {
                matched += 1;
            }
        }
    }
    matched == n
}

fn augment(
    i: usize,
    adj: &[Vec<u32>],
    match_l: &mut [u32],
    match_r: &mut [u32],
    layer: &mut [u32],
) -> bool {
    for &j in &adj[i] {
        let m = match_r[j as usize];
        let ok = if m == u32::MAX {
            true
        } else if layer[m as usize] == layer[i] + 1 {
            augment(m as usize, adj, match_l, match_r, layer)
        } else {
            false
        };
        if ok {
            match_l[i] = j;
            match_r[j as usize] = i as u32;
            return true;
        }
    }
    // Dead end: prune this vertex for the rest of the phase.
    layer[i] = u32::MAX;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_permutation_oracle_on_small_sets() {
        // Exhaustive min over permutations of the max pair distance.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(1..5);
            let pts_a: Vec<[f64; 2]> =
                (0..n).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
            let pts_b: Vec<[f64; 2]> =
                (0..n).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
            let dist = |i: usize, j: usize| {
                let dx = pts_a[i][0] - pts_b[j][0];
                let dy = pts_a[i][1] - pts_b[j][1];
                (dx * dx + dy * dy).sqrt()
            };
            let got = solve(n, &dist).unwrap();
            let brute = brute_bottleneck(n, &dist);
            assert_eq!(got.to_bits(), brute.to_bits(), "n={n}: {got} vs {brute}");
        }
    }

    fn brute_bottleneck(n: usize, dist: &dyn Fn(usize, usize) -> f64) -> f64 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        fn rec(
            perm: &mut Vec<usize>,
            k: usize,
            dist: &dyn Fn(usize, usize) -> f64,
            best: &mut f64,
        ) {
            if k == perm.len() {
                let worst = perm
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| dist(i, j))
                    .fold(f64::NEG_INFINITY, f64::max);
                if worst < *best {
                    *best = worst;
                }
                return;
            }
            for i in k..perm.len() {
                perm.swap(k, i);
                rec(perm, k + 1, dist, best);
                perm.swap(k, i);
            }
        }
        rec(&mut perm, 0, dist, &mut best);
        best
    }

    #[test]
    fn shifted_grid_has_exact_shift_bottleneck() {
        // Shifting a grid by delta moves every point by exactly delta.
        let mut a = Vec::new();
        for r in 0..4 {
            for c in 0..4 {
                a.push([r as f64, c as f64]);
            }
        }
        let delta = 0.125;
        let b: Vec<[f64; 2]> = a.iter().map(|p| [p[0] + delta, p[1]]).collect();
        let dist = |i: usize, j: usize| {
            let dx = a[i][0] - b[j][0];
            let dy = a[i][1] - b[j][1];
            (dx * dx + dy * dy).sqrt()
        };
        let got = solve(16, &dist).unwrap();
        assert_eq!(got, delta);
    }
}
