//! Exact one-dimensional transport via the sorted sweep.
//!
//! For a convex cost `|x - y|^p` on the line the monotone coupling is
//! optimal, so the problem reduces to merging the two mass profiles in
//! order of position. Positional ties break by original index, which
//! keeps the output deterministic across runs.

use super::WeightedPointSet;
use crate::energy::pow_p;
use crate::error::Result;
use crate::util::ExactSum;

const SNAP: f64 = 1e-15;

pub(super) fn solve(
    a: &WeightedPointSet,
    b: &WeightedPointSet,
    p: f64,
) -> Result<(f64, Vec<(u32, u32, f64)>)> {
    let mut ia: Vec<u32> = (0..a.len() as u32).collect();
    let mut ib: Vec<u32> = (0..b.len() as u32).collect();
    ia.sort_by(|&x, &y| {
        a.point(x as usize)[0]
            .total_cmp(&a.point(y as usize)[0])
            .then(x.cmp(&y))
    });
    ib.sort_by(|&x, &y| {
        b.point(x as usize)[0]
            .total_cmp(&b.point(y as usize)[0])
            .then(x.cmp(&y))
    });

    let mut entries = Vec::with_capacity(a.len() + b.len());
    let mut total = ExactSum::new();
    let (mut ka, mut kb) = (0usize, 0usize);
    let mut rem_a = a.mass(ia[0] as usize);
    let mut rem_b = b.mass(ib[0] as usize);
    loop {
        // Skip exhausted atoms (zero-mass inputs land here immediately).
        while rem_a <= 0.0 {
            ka += 1;
            if ka == a.len() {
                total_result(&mut entries);
                return Ok((total.value(), entries));
            }
            rem_a = a.mass(ia[ka] as usize);
        }
        while rem_b <= 0.0 {
            kb += 1;
            if kb == b.len() {
                total_result(&mut entries);
                return Ok((total.value(), entries));
            }
            rem_b = b.mass(ib[kb] as usize);
        }
        let i = ia[ka] as usize;
        let j = ib[kb] as usize;
        let step = rem_a.min(rem_b);
        entries.push((i as u32, j as u32, step));
        total.add(step * pow_p((a.point(i)[0] - b.point(j)[0]).abs(), p));
        rem_a -= step;
        rem_b -= step;
        if rem_a.abs() < SNAP {
            rem_a = 0.0;
        }
        if rem_b.abs() < SNAP {
            rem_b = 0.0;
        }
        if ka + 1 == a.len() && kb + 1 == b.len() && rem_a <= 0.0 && rem_b <= 0.0 {
            total_result(&mut entries);
            return Ok((total.value(), entries));
        }
        if rem_a <= 0.0 && ka + 1 == a.len() {
            // Residual imbalance from rounding: dump what is left of b
            // onto the last atom of a.
            for k in kb..b.len() {
                let jj = ib[k] as usize;
                let m = if k == kb { rem_b } else { b.mass(jj) };
                if m > 0.0 {
                    entries.push((i as u32, jj as u32, m));
                    total.add(m * pow_p((a.point(i)[0] - b.point(jj)[0]).abs(), p));
                }
            }
            total_result(&mut entries);
            return Ok((total.value(), entries));
        }
        if rem_b <= 0.0 && kb + 1 == b.len() {
            for k in ka..a.len() {
                let ii = ia[k] as usize;
                let m = if k == ka { rem_a } else { a.mass(ii) };
                if m > 0.0 {
                    entries.push((ii as u32, j as u32, m));
                    total.add(m * pow_p((a.point(ii)[0] - b.point(j)[0]).abs(), p));
                }
            }
            total_result(&mut entries);
            return Ok((total.value(), entries));
        }
    }
}

/// Merge duplicate `(a, b)` pairs that the sweep can emit when an atom
/// is revisited after a zero-snap.
fn total_result(entries: &mut Vec<(u32, u32, f64)>) {
    entries.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    entries.dedup_by(|later, first| {
        if later.0 == first.0 && later.1 == first.1 {
            first.2 += later.2;
            true
        } else {
            false
        }
    });
}
