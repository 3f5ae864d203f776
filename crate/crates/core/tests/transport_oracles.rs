//! Cross-checks of the transport distances against brute-force oracles
//! and the metric axioms.

use pgl_core::{ot_distance_inf, ot_distance_p, tlp_distance, LabelField, PointCloud, WeightedPointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_uniform_set(rng: &mut ChaCha8Rng, n: usize, d: usize) -> WeightedPointSet {
    let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    WeightedPointSet::uniform(PointCloud::from_flat(d, data).unwrap()).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..rest.len() {
            let v = rest.remove(k);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(k, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[test]
fn distances_match_permutation_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let n = rng.gen_range(1..=5);
        let d = rng.gen_range(1..=3);
        let p = [1.0, 2.0, 3.0][trial % 3];
        let a = random_uniform_set(&mut rng, n, d);
        let b = random_uniform_set(&mut rng, n, d);

        let mut best = f64::INFINITY;
        for perm in permutations(n) {
            let total: f64 = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| euclid(a.point(i), b.point(j)).powf(p) / n as f64)
                .sum();
            best = best.min(total);
        }
        let oracle = best.powf(1.0 / p);

        let (got, plan) = ot_distance_p(&a, &b, p).unwrap();
        assert!(
            (got - oracle).abs() <= 1e-9,
            "trial {trial}: n={n} d={d} p={p}: {got} vs oracle {oracle}"
        );
        assert!(plan.marginal_error(&a, &b) <= 1e-9);
    }
}

#[test]
fn labeled_distance_matches_permutation_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..200 {
        let n = rng.gen_range(1..=5);
        let p = [1.0, 2.0][trial % 2];
        let a = random_uniform_set(&mut rng, n, 2);
        let b = random_uniform_set(&mut rng, n, 2);
        let u = LabelField::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let v = LabelField::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());

        let mut best = f64::INFINITY;
        for perm in permutations(n) {
            let total: f64 = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| {
                    (euclid(a.point(i), b.point(j)).powf(p)
                        + (u.values()[i] - v.values()[j]).abs().powf(p))
                        / n as f64
                })
                .sum();
            best = best.min(total);
        }
        let oracle = best.powf(1.0 / p);

        let got = tlp_distance(&a, &u, &b, &v, p).unwrap();
        assert!(
            (got - oracle).abs() <= 1e-9,
            "trial {trial}: n={n} p={p}: {got} vs oracle {oracle}"
        );
    }
}

#[test]
fn sort_solver_agrees_with_the_flow_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(4096);
    for trial in 0..200 {
        let n = rng.gen_range(1..=12);
        let m = rng.gen_range(1..=12);
        let p = [1.0, 2.0][trial % 2];
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let wa = random_masses(&mut rng, n);
        let wb = random_masses(&mut rng, m);

        let a1 = WeightedPointSet::new(PointCloud::from_flat(1, xs.clone()).unwrap(), wa.clone())
            .unwrap();
        let b1 = WeightedPointSet::new(PointCloud::from_flat(1, ys.clone()).unwrap(), wb.clone())
            .unwrap();
        // The same instance lifted to d=2 routes through min-cost flow.
        let lift = |v: &[f64]| {
            PointCloud::from_flat(2, v.iter().flat_map(|&x| [x, 0.0]).collect()).unwrap()
        };
        let a2 = WeightedPointSet::new(lift(&xs), wa).unwrap();
        let b2 = WeightedPointSet::new(lift(&ys), wb).unwrap();

        let (d1, _) = ot_distance_p(&a1, &b1, p).unwrap();
        let (d2, _) = ot_distance_p(&a2, &b2, p).unwrap();
        assert!(
            (d1 - d2).abs() <= 1e-9,
            "trial {trial}: sweep {d1} vs flow {d2} (n={n}, m={m}, p={p})"
        );
    }
}

fn random_masses(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
    // Push the rounding drift into the last atom so the sum is exact.
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    w
}

#[test]
fn metric_axioms_hold_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for trial in 0..100 {
        let p = [1.0, 2.0][trial % 2];
        let na = rng.gen_range(1..=5);
        let nb = rng.gen_range(1..=5);
        let nc = rng.gen_range(1..=5);
        let a = random_uniform_set(&mut rng, na, 2);
        let b = random_uniform_set(&mut rng, nb, 2);
        let c = random_uniform_set(&mut rng, nc, 2);

        let (ab, _) = ot_distance_p(&a, &b, p).unwrap();
        let (ba, _) = ot_distance_p(&b, &a, p).unwrap();
        assert_eq!(ab.to_bits(), ba.to_bits(), "trial {trial}: symmetry broke");

        let (bc, _) = ot_distance_p(&b, &c, p).unwrap();
        let (ac, _) = ot_distance_p(&a, &c, p).unwrap();
        assert!(
            ac <= ab + bc + 1e-9,
            "trial {trial}: triangle violated: {ac} > {ab} + {bc}"
        );

        let (aa, _) = ot_distance_p(&a, &a, p).unwrap();
        assert_eq!(aa, 0.0, "trial {trial}: self-distance must vanish");
    }
}

#[test]
fn labeled_metric_axioms_hold_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(910);
    for trial in 0..100 {
        let p = [1.0, 2.0][trial % 2];
        let draw = |rng: &mut ChaCha8Rng| {
            let n = rng.gen_range(1..=5);
            let set = random_uniform_set(rng, n, 2);
            let lab = LabelField::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
            (set, lab)
        };
        let (a, u) = draw(&mut rng);
        let (b, v) = draw(&mut rng);
        let (c, w) = draw(&mut rng);

        let ab = tlp_distance(&a, &u, &b, &v, p).unwrap();
        let ba = tlp_distance(&b, &v, &a, &u, p).unwrap();
        assert_eq!(ab.to_bits(), ba.to_bits(), "trial {trial}: symmetry broke");

        let bc = tlp_distance(&b, &v, &c, &w, p).unwrap();
        let ac = tlp_distance(&a, &u, &c, &w, p).unwrap();
        assert!(
            ac <= ab + bc + 1e-9,
            "trial {trial}: triangle violated: {ac} > {ab} + {bc}"
        );

        let aa = tlp_distance(&a, &u, &a, &u, p).unwrap();
        assert_eq!(aa, 0.0, "trial {trial}: self-distance must vanish");
    }
}

#[test]
fn bottleneck_matches_permutation_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for trial in 0..100 {
        let n = rng.gen_range(1..=4);
        let a = random_uniform_set(&mut rng, n, 2);
        let b = random_uniform_set(&mut rng, n, 2);

        let mut best = f64::INFINITY;
        for perm in permutations(n) {
            let worst = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| euclid(a.point(i), b.point(j)))
                .fold(0.0f64, f64::max);
            best = best.min(worst);
        }

        let got = ot_distance_inf(&a, &b).unwrap();
        assert_eq!(
            got.to_bits(),
            best.to_bits(),
            "trial {trial}: {got} vs brute {best}"
        );
    }
}
