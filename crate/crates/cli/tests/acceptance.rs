//! Acceptance gate for the workspace: one test per criterion, each
//! printing a single `ACCEPTANCE k (name): PASS|FAIL` line (visible under
//! `cargo test --test acceptance -- --nocapture`). Tolerances are pinned
//! as constants next to the criterion that uses them; loosening one is a
//! design change, not a test fix.

use pgl_cli::commands::{self, RunContext};
use pgl_cli::config::{self, BeanCfg, ConvergeCfg, MinimizeCfg, SegmentCfg};
use pgl_cli::provenance::Provenance;
use pgl_core::{
    build_graph, cell_sigma, f_eps_energy, gl_energy, gl_gradient, gl_infinity_energy,
    gl_tilde_energy, marginal_kernel, minimize, ot_distance_p, rate_diagnostic, tlp_distance,
    BoxDomain, GridField, Kernel, KernelShape, LabelField, PointCloud, Potential,
    ProfileOptions, SolveOptions, WeightedPointSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::time::Instant;

/// Max relative error (against the gradient's sup norm) between the
/// analytic gradient and central divided differences.
const GRAD_REL_TOL: f64 = 1e-6;
/// Relative slack on closed-form energy values.
const EXACT_REL_TOL: f64 = 1e-12;
/// Absolute slack when comparing transport solvers to brute force and
/// to each other; distances here are O(1).
const TRANSPORT_ABS_TOL: f64 = 1e-9;
/// Additive slack on the triangle inequality.
const TRIANGLE_SLACK: f64 = 1e-9;
/// The surface tension must clear this floor.
const SIGMA_LOWER: f64 = 1e-6;
/// At p = 1 the optimal profile is the hard step, so sigma matches the
/// quadrature oracle up to discretization error of the default grid
/// (about 0.9% at m = 400); two-sided 2% pins the equality.
const SIGMA_P1_TOL: f64 = 0.02;
/// Spread allowed across directions for a radial kernel.
const ISOTROPY_TOL: f64 = 0.02;
/// Relative movement allowed when the truncation window doubles.
const WINDOW_DOUBLING_TOL: f64 = 1e-3;
/// Band for the discrete-to-prediction ratio at the largest n.
const CONSISTENCY_BAND: (f64, f64) = (0.85, 1.15);
/// The closed-form prediction 8/3 is reproduced through the marginal
/// quadrature, so the match is quadrature-tight rather than exact.
const PREDICTION_REL_TOL: f64 = 1e-3;
/// Allowed gap between the p = 200 tilde energy and the infinity form.
const TILDE_INF_REL_TOL: f64 = 0.05;
/// Per-step increase allowed on an energy trace (the solver aborts past
/// this internally; reasserted here on the recorded trace).
const TRACE_SLACK: f64 = pgl_core::solver::TRACE_MONOTONICITY_SLACK;
/// Hard cap on the rate-diagnostic ratios.
const RATE_BOUND: f64 = 10.0;
/// The ratio approaches its limiting constant from below at these n, so
/// "non-increasing in trend" is pinned as bounded wobble: consecutive
/// medians within this factor and the last within it of the first.
const RATE_TREND_SLACK: f64 = 1.3;

fn criterion(k: usize, name: &str, body: impl FnOnce() + std::panic::UnwindSafe) {
    match std::panic::catch_unwind(body) {
        Ok(()) => println!("ACCEPTANCE {k} ({name}): PASS"),
        Err(cause) => {
            println!("ACCEPTANCE {k} ({name}): FAIL");
            std::panic::resume_unwind(cause);
        }
    }
}

fn ball(radius: f64, dim: usize) -> Kernel {
    Kernel::new(KernelShape::BallIndicator { radius }, dim).unwrap()
}

fn uniform_cloud(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> PointCloud {
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
    PointCloud::from_rows(&rows).unwrap()
}

fn random_field(n: usize, rng: &mut ChaCha8Rng) -> LabelField {
    LabelField::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn ctx(out: &Path, cfg: &impl serde::Serialize, seed: u64) -> RunContext {
    let canonical = config::canonical(cfg).unwrap();
    RunContext {
        out: out.to_path_buf(),
        seed,
        provenance: Provenance::new(&canonical, seed),
    }
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn acceptance_01_gradient_matches_divided_differences() {
    criterion(1, "gradient vs central differences", || {
        let start = Instant::now();
        let v = Potential::quartic();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for graph_idx in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0001 + graph_idx);
            let cloud = uniform_cloud(50, 2, &mut rng);
            let g = build_graph(&cloud, &ball(1.0, 2), 0.35).unwrap();
            let u = random_field(g.n(), &mut rng);
            for &p in &[1.5, 2.0, 3.0, 10.0] {
                let grad = gl_gradient(&g, &u, p, &v).unwrap();
                let scale = grad.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                assert!(scale > 0.0, "degenerate gradient on graph {graph_idx}");
                for i in 0..g.n() {
                    let mut hi = u.values().to_vec();
                    let mut lo = hi.clone();
                    hi[i] += h;
                    lo[i] -= h;
                    let e_hi =
                        gl_energy(&g, &LabelField::new(hi), p, &v).unwrap().total;
                    let e_lo =
                        gl_energy(&g, &LabelField::new(lo), p, &v).unwrap().total;
                    let fd = (e_hi - e_lo) / (2.0 * h);
                    worst = worst.max((grad[i] - fd).abs() / scale);
                }
            }
        }
        assert!(worst <= GRAD_REL_TOL, "max relative gradient error {worst:e}");
        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 10.0, "gradient check took {elapsed:.1} s");
    });
}

#[test]
fn acceptance_02_closed_form_energy_values() {
    criterion(2, "closed-form energy values", || {
        let v = Potential::quartic();
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0002);
        let cloud = uniform_cloud(40, 2, &mut rng);
        let g = build_graph(&cloud, &ball(1.0, 2), 0.3).unwrap();

        let zero = LabelField::constant(g.n(), 0.0);
        let expected = v.eval(0.0) / g.eps();
        let got = gl_energy(&g, &zero, 2.0, &v).unwrap().total;
        assert!(
            (got - expected).abs() <= EXACT_REL_TOL * expected,
            "u=0 energy {got} vs {expected}"
        );

        for sign in [-1.0, 1.0] {
            let u = LabelField::constant(g.n(), sign);
            let e = gl_energy(&g, &u, 2.0, &v).unwrap();
            assert_eq!(e.total, 0.0, "u={sign} must be an exact zero");
        }

        // Binary fields collapse the p-dependence to the factor 2^(p-2),
        // up to the interaction weight.
        let gf = GridField::from_fn(
            BoxDomain::unit_cube(2),
            vec![24, 24],
            |x| if x[0] >= 0.5 { 1.0 } else { -1.0 },
            |_| 1.0,
        )
        .unwrap();
        let s_eps = 0.9;
        let base = f_eps_energy(&gf, &ball(1.0, 2), &v, 0.15, 2.0, 1.0).unwrap();
        assert!(base > 0.0);
        for &p in &[1.0, 2.0, 3.0] {
            let full = f_eps_energy(&gf, &ball(1.0, 2), &v, 0.15, p, s_eps).unwrap();
            let factored = (p - 2.0).exp2() * s_eps * base;
            assert!(
                (full - factored).abs() <= EXACT_REL_TOL * factored.abs(),
                "binary identity at p={p}: {full} vs {factored}"
            );
        }
    });
}

/// Calls `body` with every permutation of `0..n`.
fn for_each_permutation(n: usize, body: &mut impl FnMut(&[usize])) {
    fn heap(k: usize, idx: &mut Vec<usize>, body: &mut impl FnMut(&[usize])) {
        if k <= 1 {
            body(idx);
            return;
        }
        for i in 0..k {
            heap(k - 1, idx, body);
            if k % 2 == 0 {
                idx.swap(i, k - 1);
            } else {
                idx.swap(0, k - 1);
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    heap(n, &mut idx, body);
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn uniform_set(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> WeightedPointSet {
    WeightedPointSet::uniform(uniform_cloud(n, dim, rng)).unwrap()
}

#[test]
fn acceptance_03_transport_against_brute_force() {
    criterion(3, "transport oracles", || {
        let start = Instant::now();
        let p_grid = [1.0, 1.5, 2.0, 3.0];

        // Exactness on instances small enough to enumerate matchings.
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0003);
        for case in 0..200usize {
            let n = rng.gen_range(2..=5);
            let dim = rng.gen_range(1..=3);
            let p = p_grid[case % p_grid.len()];
            let a = uniform_set(n, dim, &mut rng);
            let b = uniform_set(n, dim, &mut rng);
            let u = random_field(n, &mut rng);
            let w = random_field(n, &mut rng);

            let mut best_ot = f64::INFINITY;
            let mut best_tlp = f64::INFINITY;
            for_each_permutation(n, &mut |perm| {
                let mut spatial = 0.0;
                let mut labeled = 0.0;
                for (i, &j) in perm.iter().enumerate() {
                    let d = dist(a.point(i), b.point(j)).powf(p);
                    spatial += d;
                    labeled += d + (u.values()[i] - w.values()[j]).abs().powf(p);
                }
                let nf = n as f64;
                best_ot = best_ot.min((spatial / nf).powf(1.0 / p));
                best_tlp = best_tlp.min((labeled / nf).powf(1.0 / p));
            });

            let (got_ot, _) = ot_distance_p(&a, &b, p).unwrap();
            let got_tlp = tlp_distance(&a, &u, &b, &w, p).unwrap();
            assert!(
                (got_ot - best_ot).abs() <= TRANSPORT_ABS_TOL,
                "case {case}: ot {got_ot} vs brute force {best_ot}"
            );
            assert!(
                (got_tlp - best_tlp).abs() <= TRANSPORT_ABS_TOL,
                "case {case}: tlp {got_tlp} vs brute force {best_tlp}"
            );
        }

        // The 1-d sorted sweep against the general solvers, which see the
        // same instance embedded in the plane. Odd cases get non-uniform
        // masses so both the assignment and the flow paths are exercised.
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0013);
        for case in 0..200usize {
            let n = rng.gen_range(2..=40);
            let p = p_grid[case % p_grid.len()];
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let masses = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
                let total: f64 = raw.iter().sum();
                raw.iter().map(|m| m / total).collect()
            };
            let line = |v: &[f64]| PointCloud::from_flat(1, v.to_vec()).unwrap();
            let plane = |v: &[f64]| {
                PointCloud::from_rows(
                    &v.iter().map(|&x| vec![x, 0.0]).collect::<Vec<_>>(),
                )
                .unwrap()
            };
            let (a1, b1, a2, b2) = if case % 2 == 0 {
                (
                    WeightedPointSet::uniform(line(&xs)).unwrap(),
                    WeightedPointSet::uniform(line(&ys)).unwrap(),
                    WeightedPointSet::uniform(plane(&xs)).unwrap(),
                    WeightedPointSet::uniform(plane(&ys)).unwrap(),
                )
            } else {
                let ma = masses(&mut rng);
                let mb = masses(&mut rng);
                (
                    WeightedPointSet::new(line(&xs), ma.clone()).unwrap(),
                    WeightedPointSet::new(line(&ys), mb.clone()).unwrap(),
                    WeightedPointSet::new(plane(&xs), ma).unwrap(),
                    WeightedPointSet::new(plane(&ys), mb).unwrap(),
                )
            };
            let (d1, _) = ot_distance_p(&a1, &b1, p).unwrap();
            let (d2, _) = ot_distance_p(&a2, &b2, p).unwrap();
            assert!(
                (d1 - d2).abs() <= TRANSPORT_ABS_TOL,
                "case {case}: sorted sweep {d1} vs general {d2}"
            );
        }

        // Metric axioms on random triples.
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0023);
        for case in 0..100usize {
            let n = rng.gen_range(2..=5);
            let dim = rng.gen_range(1..=2);
            let p = p_grid[case % p_grid.len()];
            let sets: Vec<WeightedPointSet> =
                (0..3).map(|_| uniform_set(n, dim, &mut rng)).collect();
            let labels: Vec<LabelField> =
                (0..3).map(|_| random_field(n, &mut rng)).collect();

            let d = |i: usize, j: usize| {
                tlp_distance(&sets[i], &labels[i], &sets[j], &labels[j], p).unwrap()
            };
            let (ab, ba) = (d(0, 1), d(1, 0));
            assert_eq!(ab.to_bits(), ba.to_bits(), "case {case}: tlp symmetry");
            let (o_ab, _) = ot_distance_p(&sets[0], &sets[1], p).unwrap();
            let (o_ba, _) = ot_distance_p(&sets[1], &sets[0], p).unwrap();
            assert_eq!(o_ab.to_bits(), o_ba.to_bits(), "case {case}: ot symmetry");

            let (ac, bc) = (d(0, 2), d(1, 2));
            assert!(
                ac <= ab + bc + TRIANGLE_SLACK,
                "case {case}: triangle {ac} > {ab} + {bc}"
            );
        }

        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 30.0, "transport checks took {elapsed:.1} s");
    });
}

#[test]
fn acceptance_04_cell_problem_bounds() {
    criterion(4, "cell problem", || {
        let start = Instant::now();
        let kernel = ball(1.0, 2);
        let v = Potential::quartic();
        let opts = ProfileOptions::default();
        let e1 = [1.0, 0.0];

        // Independent quadrature for the first absolute moment of the
        // marginalized kernel (Simpson on [0, R], doubled by evenness).
        let mk = marginal_kernel(&kernel, &e1, 1024).unwrap();
        let r = mk.radius();
        let m = 4000usize;
        let h = r / m as f64;
        let f = |s: f64| mk.eval(s) * s;
        let mut acc = f(0.0) + f(r);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(k as f64 * h);
        }
        let moment = 2.0 * acc * h / 3.0;
        assert!(moment > 0.0);

        for &p in &[1.0, 2.0, 4.0] {
            let res = cell_sigma(1.0, &e1, &kernel, &v, p, &opts).unwrap();
            let sigma = res.value();
            let hard = 2.0f64.powf(p) * moment;
            assert!(sigma >= SIGMA_LOWER, "p={p}: sigma {sigma} under the floor");
            if p == 1.0 {
                // The step profile is optimal; sigma equals the oracle up
                // to the grid's quadrature error.
                assert!(
                    (sigma - hard).abs() <= SIGMA_P1_TOL * hard,
                    "p=1: sigma {sigma} vs hard value {hard}"
                );
            } else {
                assert!(
                    sigma < hard,
                    "p={p}: sigma {sigma} not below hard value {hard}"
                );
            }
            let prof = res.profile().values();
            for w in prof.windows(2) {
                assert!(w[1] >= w[0], "profile decreases: {} -> {}", w[0], w[1]);
            }
        }

        // Isotropy of a radial kernel across 8 directions.
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..8 {
            let ang = std::f64::consts::PI * k as f64 / 8.0;
            let nu = [ang.cos(), ang.sin()];
            let s = cell_sigma(1.0, &nu, &kernel, &v, 2.0, &opts).unwrap().value();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        assert!(
            (hi - lo) / lo <= ISOTROPY_TOL,
            "anisotropy {:.4}% exceeds {}%",
            100.0 * (hi - lo) / lo,
            100.0 * ISOTROPY_TOL
        );

        // Doubling the truncation window at fixed node spacing.
        let wide = ProfileOptions { l: 2.0 * opts.l, m: 2 * opts.m - 1, ..opts.clone() };
        for &p in &[2.0, 4.0] {
            let narrow = cell_sigma(1.0, &e1, &kernel, &v, p, &opts).unwrap().value();
            let doubled = cell_sigma(1.0, &e1, &kernel, &v, p, &wide).unwrap().value();
            assert!(
                (doubled - narrow).abs() < WINDOW_DOUBLING_TOL * narrow,
                "p={p}: window doubling moved sigma {narrow} -> {doubled}"
            );
        }

        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 60.0, "cell checks took {elapsed:.1} s");
    });
}

#[test]
fn acceptance_05_sharp_interface_consistency() {
    criterion(5, "sharp-interface consistency", || {
        let start = Instant::now();
        let dir = tempfile::tempdir().unwrap();
        let cfg = ConvergeCfg {
            n_list: vec![1000, 4000, 16000, 20000],
            seeds: 10,
            seed: 0,
            ..ConvergeCfg::default()
        };
        commands::converge::run(&cfg, &ctx(dir.path(), &cfg, cfg.seed)).unwrap();

        let doc = read_json(&dir.path().join("converge.json"));
        let rows = doc["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 4);

        let prediction = rows[0]["prediction"].as_f64().unwrap();
        let closed_form = 8.0 / 3.0;
        assert!(
            (prediction - closed_form).abs() <= PREDICTION_REL_TOL * closed_form,
            "prediction {prediction} vs closed form {closed_form}"
        );

        let last = &rows[3];
        assert_eq!(last["n"].as_u64().unwrap(), 20000);
        let ratios: Vec<f64> =
            last["ratios"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        let in_band = ratios
            .iter()
            .filter(|&&x| CONSISTENCY_BAND.0 <= x && x <= CONSISTENCY_BAND.1)
            .count();
        assert!(in_band >= 8, "only {in_band}/10 ratios inside the band: {ratios:?}");

        let medians: Vec<f64> =
            rows[..3].iter().map(|r| r["median_abs_deviation"].as_f64().unwrap()).collect();
        assert!(
            medians[0] > medians[1] && medians[1] > medians[2],
            "median |ratio - 1| not decreasing: {medians:?}"
        );

        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 300.0, "consistency study took {elapsed:.1} s");
    });
}

#[test]
fn acceptance_06_tilde_energy_approaches_infinity_form() {
    criterion(6, "p to infinity", || {
        let v = Potential::quartic();
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0006 + seed);
            let cloud = uniform_cloud(10, 2, &mut rng);
            let g = build_graph(&cloud, &ball(1.0, 2), 0.8).unwrap();
            let u = random_field(g.n(), &mut rng);

            let inf = gl_infinity_energy(&g, &u, &v).unwrap();
            assert!(inf > 0.0, "graph {seed}: degenerate infinity energy");
            let gaps: Vec<f64> = [2.0, 10.0, 50.0, 200.0]
                .iter()
                .map(|&p| (gl_tilde_energy(&g, &u, p, &v).unwrap() - inf).abs())
                .collect();
            assert!(
                gaps[3] <= TILDE_INF_REL_TOL * inf,
                "graph {seed}: |tilde(200) - inf| = {} vs inf {inf}",
                gaps[3]
            );
            for w in gaps.windows(2) {
                assert!(
                    w[1] <= w[0],
                    "graph {seed}: envelope not monotone: {gaps:?}"
                );
            }
        }
    });
}

#[test]
fn acceptance_07_bean_crossing_ordering() {
    criterion(7, "bean ordering", || {
        let start = Instant::now();
        let dir = tempfile::tempdir().unwrap();
        let cfg = BeanCfg::default();
        commands::bean::run(&cfg, &ctx(dir.path(), &cfg, cfg.seed)).unwrap();

        let doc = read_json(&dir.path().join("bean.json"));
        let per_p = doc["per_p"].as_array().unwrap();
        let entry = |target: f64| {
            per_p
                .iter()
                .find(|e| e["p"].as_f64().unwrap() == target)
                .unwrap_or_else(|| panic!("no entry for p={target}"))
        };
        let (soft, wall) = (entry(2.0), entry(100.0));

        let median_2 = soft["median_abs_crossing"].as_f64().unwrap();
        let median_100 = wall["median_abs_crossing"].as_f64().unwrap();
        assert!(
            median_2 > median_100,
            "median |crossing|: p=2 {median_2} vs p=100 {median_100}"
        );
        for e in [soft, wall] {
            let purity = e["min_purity"].as_f64().unwrap();
            assert!(purity >= 0.9, "p={} purity {purity}", e["p"]);
        }

        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 300.0, "bean study took {elapsed:.1} s");
    });
}

fn write_p2(path: &Path, w: usize, h: usize, vals: &[u8]) {
    let mut text = format!("P2\n{w} {h}\n255\n");
    for row in vals.chunks(w) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

fn read_p2_values(path: &Path) -> (usize, usize, Vec<u32>) {
    let text = std::fs::read_to_string(path).unwrap();
    let tokens: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split_whitespace())
        .collect();
    assert_eq!(tokens[0], "P2");
    let w: usize = tokens[1].parse().unwrap();
    let h: usize = tokens[2].parse().unwrap();
    let vals = tokens[4..4 + w * h].iter().map(|t| t.parse().unwrap()).collect();
    (w, h, vals)
}

#[test]
fn acceptance_08_two_tone_segmentation_is_exact() {
    criterion(8, "two-tone segmentation", || {
        let dir = tempfile::tempdir().unwrap();
        let (w, h) = (64usize, 64usize);
        let image: Vec<u8> =
            (0..w * h).map(|i| if i % w < w / 2 { 40 } else { 200 }).collect();
        let mut mask = vec![0u8; w * h];
        for r in 30..33 {
            for c in 14..17 {
                mask[r * w + c] = 64; // class -1 scribble in the dark half
            }
            for c in 46..49 {
                mask[r * w + c] = 255; // class +1 scribble in the bright half
            }
        }
        let image_path = dir.path().join("twotone.pgm");
        let mask_path = dir.path().join("scribbles.pgm");
        write_p2(&image_path, w, h, &image);
        write_p2(&mask_path, w, h, &mask);

        let cfg = SegmentCfg {
            image: image_path.display().to_string(),
            mask: mask_path.display().to_string(),
            ..SegmentCfg::default()
        };
        commands::segment::run(&cfg, &ctx(dir.path(), &cfg, cfg.seed)).unwrap();

        let (lw, lh, labels) = read_p2_values(&dir.path().join("labels.pgm"));
        assert_eq!((lw, lh), (w, h));
        let wrong = (0..w * h)
            .filter(|&i| (labels[i] >= 128) != (i % w >= w / 2))
            .count();
        assert_eq!(wrong, 0, "{wrong} pixels disagree with the ground truth");

        let doc = read_json(&dir.path().join("segment.json"));
        let tau = doc["config"]["tau_color"].as_f64().unwrap();
        assert_eq!(tau, 5e-4, "default color bandwidth not echoed");
    });
}

#[test]
fn acceptance_09_solver_invariants() {
    criterion(9, "solver invariants", || {
        // Every solve in this suite runs under the library's monotonicity
        // guard, which aborts on any per-step increase beyond the slack;
        // the trace of a representative solve is reasserted here.
        let v = Potential::quartic();
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0009);
        let cloud = uniform_cloud(200, 2, &mut rng);
        let g = build_graph(&cloud, &ball(1.0, 2), 0.25).unwrap();
        let opts = SolveOptions { seed: 9, ..SolveOptions::defaults_for(&g, &v, None) };
        let res = minimize(&g, 2.0, &v, None, &opts, Some(&cloud)).unwrap();
        for w in res.energy_trace.windows(2) {
            assert!(
                w[1] <= w[0] + TRACE_SLACK,
                "trace increased {} -> {}",
                w[0],
                w[1]
            );
        }

        // Seed-fixed reruns must reproduce every output byte.
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            let cfg = MinimizeCfg { seed: 3, ..MinimizeCfg::default() };
            commands::minimize::run(&cfg, &ctx(dir.path(), &cfg, cfg.seed)).unwrap();
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (
                        e.file_name().into_string().unwrap(),
                        std::fs::read(e.path()).unwrap(),
                    )
                })
                .collect();
            files.sort();
            files
        };
        let (first, second) = (run(), run());
        assert_eq!(first.len(), second.len());
        for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(&second) {
            assert_eq!(name_a, name_b);
            assert_eq!(bytes_a, bytes_b, "{name_a} differs between reruns");
        }
    });
}

#[test]
fn acceptance_10_transport_rate_diagnostic() {
    criterion(10, "transport rate diagnostic", || {
        let rows = rate_diagnostic(2, &[64, 128, 256, 512], 10, 20260815).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            for &ratio in &row.ratios {
                assert!(
                    ratio <= RATE_BOUND,
                    "n={}: ratio {ratio} above {RATE_BOUND}",
                    row.n
                );
            }
        }
        let medians: Vec<f64> = rows.iter().map(|r| r.median).collect();
        for w in medians.windows(2) {
            assert!(
                w[1] <= RATE_TREND_SLACK * w[0],
                "median ratio jumped {} -> {}",
                w[0],
                w[1]
            );
        }
        assert!(
            medians[3] <= RATE_TREND_SLACK * medians[0],
            "trend rises overall: {medians:?}"
        );
    });
}
