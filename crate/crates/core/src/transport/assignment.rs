//! Dense square assignment by shortest augmenting paths with potentials.
//!
//! Exact for real-valued costs. Ties in the column scan resolve toward
//! the lowest index, so repeated runs produce the same permutation.

pub(super) fn solve(n: usize, cost: &dyn Fn(usize, usize) -> f64) -> (Vec<usize>, f64) {
    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = cost(i, j);
        }
    }

    // Column n is a virtual root used to seed each augmentation.
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![usize::MAX; n + 1];
    let mut way = vec![n; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 0..n {
        row_of[n] = i;
        let mut j0 = n;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = usize::MAX;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let cur = a[i0 * n + j] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            debug_assert!(j1 != usize::MAX, "finite costs always leave a reachable column");
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else if minv[j].is_finite() {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == usize::MAX {
                break;
            }
        }
        while j0 != n {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        }
    }

    let mut perm = vec![usize::MAX; n];
    let mut total = crate::util::ExactSum::new();
    for j in 0..n {
        let i = row_of[j];
        perm[i] = j;
        total.add(a[i * n + j]);
    }
    (perm, total.value())
}
