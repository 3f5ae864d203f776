//! Sampled verification of the standing assumptions on the kernel, the
//! potential, and the density. Checks are report-only: a failed assumption
//! does not stop anything, it tells you the theory no longer backs you up.

use crate::density::Density;
use crate::kernel::{Kernel, KernelShape};
use crate::potential::Potential;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Pass,
    Fail { counterexample: String },
    /// Stated property quantifies over constants that sampling cannot
    /// falsify; it holds for the built-in shapes by known arguments.
    AssumedByConstruction,
}

#[derive(Debug, Clone)]
pub struct AssumptionCheck {
    pub id: &'static str,
    pub description: &'static str,
    pub status: CheckStatus,
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.status, CheckStatus::Fail { .. }))
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks
            .iter()
            .filter(|c| matches!(c.status, CheckStatus::Fail { .. }))
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Random samples per check, on top of deterministic grids.
    pub samples: usize,
    /// Tolerance on |quadrature mass - 1|.
    pub mass_tol: f64,
    /// Midpoint quadrature resolution per axis for the mass check.
    pub mass_quadrature: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { seed: 0, samples: 1000, mass_tol: 1e-2, mass_quadrature: 200 }
    }
}

pub fn validate_assumptions(
    kernel: &Kernel,
    potential: &Potential,
    density: &Density,
    opts: &ValidateOptions,
) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();

    checks.push(AssumptionCheck {
        id: "B1",
        description: "V > 0 away from the wells",
        status: check_b1(potential, opts.samples, &mut rng),
    });
    checks.push(AssumptionCheck {
        id: "B2",
        description: "V(1) = V(-1) = 0",
        status: check_b2(potential),
    });
    checks.push(AssumptionCheck {
        id: "B3",
        description: "V(s) >= tau*|s| for |s| >= R_V",
        status: check_b3(potential, opts.samples, &mut rng),
    });
    checks.push(AssumptionCheck {
        id: "B4",
        description: "V is L_V-Lipschitz on [-1,1]",
        status: check_b4(potential, opts.samples, &mut rng),
    });
    checks.push(AssumptionCheck {
        id: "C1",
        description: "eta >= 0 and eta(0) > 0",
        status: check_c1(kernel, opts.samples, &mut rng),
    });
    checks.push(AssumptionCheck {
        id: "C2",
        description: "eta is even",
        status: check_c2(kernel, opts.samples, &mut rng),
    });
    checks.push(AssumptionCheck {
        id: "C3",
        description: "eta vanishes outside its support radius",
        status: check_c3(kernel, opts.samples, &mut rng),
    });
    checks.push(AssumptionCheck {
        id: "C4",
        description: "near-monotone comparability of eta along rays",
        status: check_c4(kernel),
    });
    checks.push(AssumptionCheck {
        id: "A1",
        description: "c1 <= rho <= c2 on the domain",
        status: check_a1(density, opts.samples, &mut rng),
    });
    checks.push(AssumptionCheck {
        id: "A2",
        description: "rho integrates to 1",
        status: check_a2(density, opts),
    });

    AssumptionReport { checks }
}

fn check_b1(v: &Potential, samples: usize, rng: &mut ChaCha8Rng) -> CheckStatus {
    let mut points: Vec<f64> = (0..=600).map(|i| -3.0 + i as f64 * 0.01).collect();
    points.extend((0..samples).map(|_| rng.gen_range(-3.0..3.0)));
    for s in points {
        if (s - 1.0).abs() < 1e-9 || (s + 1.0).abs() < 1e-9 {
            continue;
        }
        if !(v.eval(s) > 0.0) {
            return CheckStatus::Fail { counterexample: format!("V({s}) = {} <= 0", v.eval(s)) };
        }
    }
    CheckStatus::Pass
}

fn check_b2(v: &Potential) -> CheckStatus {
    for s in [1.0, -1.0] {
        let val = v.eval(s);
        if val.abs() > 1e-12 {
            return CheckStatus::Fail { counterexample: format!("V({s}) = {val} != 0") };
        }
    }
    CheckStatus::Pass
}

fn check_b3(v: &Potential, samples: usize, rng: &mut ChaCha8Rng) -> CheckStatus {
    let r = v.r_v();
    let tau = v.tau();
    let mut points: Vec<f64> = (0..=500).map(|i| r + i as f64 * 0.02).collect();
    points.extend((0..samples).map(|_| rng.gen_range(r..r + 10.0)));
    for s in points {
        for t in [s, -s] {
            if v.eval(t) < tau * t.abs() {
                return CheckStatus::Fail {
                    counterexample: format!("V({t}) = {} < tau*|s| = {}", v.eval(t), tau * t.abs()),
                };
            }
        }
    }
    CheckStatus::Pass
}

fn check_b4(v: &Potential, samples: usize, rng: &mut ChaCha8Rng) -> CheckStatus {
    let l = v.lipschitz();
    let grid: Vec<f64> = (0..=100).map(|i| -1.0 + i as f64 * 0.02).collect();
    for (i, &a) in grid.iter().enumerate() {
        for &b in &grid[i + 1..] {
            if (v.eval(a) - v.eval(b)).abs() > l * (a - b).abs() + 1e-12 {
                return CheckStatus::Fail {
                    counterexample: format!("|V({a})-V({b})| > {l}*|a-b|"),
                };
            }
        }
    }
    for _ in 0..samples {
        let a = rng.gen_range(-1.0..1.0);
        let b = rng.gen_range(-1.0..1.0);
        if (v.eval(a) - v.eval(b)).abs() > l * (a - b).abs() + 1e-12 {
            return CheckStatus::Fail { counterexample: format!("|V({a})-V({b})| > {l}*|a-b|") };
        }
    }
    CheckStatus::Pass
}

fn ball_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    // direction from a Gaussian-ish sum, radius uniform in [0, radius]
    loop {
        let z: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: f64 = z.iter().map(|v| v * v).sum();
        if n2 > 1e-9 && n2 <= 1.0 {
            let r: f64 = rng.gen_range(0.0..radius);
            let scale = r / n2.sqrt();
            return z.into_iter().map(|v| v * scale).collect();
        }
    }
}

fn check_c1(k: &Kernel, samples: usize, rng: &mut ChaCha8Rng) -> CheckStatus {
    let at0 = k.at_origin();
    if !(at0 > 0.0) {
        return CheckStatus::Fail { counterexample: format!("eta(0) = {at0}") };
    }
    let r = k.support_radius();
    for _ in 0..samples {
        let x = ball_point(rng, k.dim(), 1.5 * r);
        let val = k.eval(&x);
        if !(val >= 0.0) {
            return CheckStatus::Fail { counterexample: format!("eta({x:?}) = {val} < 0") };
        }
    }
    CheckStatus::Pass
}

fn check_c2(k: &Kernel, samples: usize, rng: &mut ChaCha8Rng) -> CheckStatus {
    let r = k.support_radius();
    for _ in 0..samples {
        let x = ball_point(rng, k.dim(), 1.2 * r);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        if k.eval(&x) != k.eval(&neg) {
            return CheckStatus::Fail {
                counterexample: format!("eta({x:?}) != eta(-x): {} vs {}", k.eval(&x), k.eval(&neg)),
            };
        }
    }
    CheckStatus::Pass
}

fn check_c3(k: &Kernel, samples: usize, rng: &mut ChaCha8Rng) -> CheckStatus {
    let r = k.support_radius();
    for _ in 0..samples {
        let mut x = ball_point(rng, k.dim(), r);
        let n: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1e-12 {
            continue;
        }
        // push strictly outside the support ball
        let factor = (r * (1.0 + rng.gen_range(1e-6..1.0))) / n;
        for v in &mut x {
            *v *= factor;
        }
        let val = k.eval(&x);
        if val != 0.0 {
            return CheckStatus::Fail {
                counterexample: format!("eta({x:?}) = {val} outside radius {r}"),
            };
        }
    }
    CheckStatus::Pass
}

fn check_c4(k: &Kernel) -> CheckStatus {
    match k.shape() {
        KernelShape::ShellIndicator { inner, .. } => CheckStatus::Fail {
            counterexample: format!(
                "eta vanishes on the ball of radius {inner} around 0; no comparability constant works"
            ),
        },
        _ => CheckStatus::AssumedByConstruction,
    }
}

fn check_a1(rho: &Density, samples: usize, rng: &mut ChaCha8Rng) -> CheckStatus {
    let (c1, c2) = rho.bounds();
    if !(c1 > 0.0 && c1 <= c2) {
        return CheckStatus::Fail { counterexample: format!("bounds ({c1}, {c2}) not ordered positive") };
    }
    let b = rho.bounding_box();
    let mut tested = 0usize;
    let mut draws = 0usize;
    while tested < samples && draws < 100 * samples {
        draws += 1;
        let x = b.sample_uniform(rng);
        let v = rho.eval(&x);
        if v == 0.0 {
            continue; // outside the (possibly masked) domain
        }
        tested += 1;
        if v < c1 * (1.0 - 1e-12) || v > c2 * (1.0 + 1e-12) {
            return CheckStatus::Fail {
                counterexample: format!("rho({x:?}) = {v} outside [{c1}, {c2}]"),
            };
        }
    }
    if tested == 0 {
        return CheckStatus::Fail {
            counterexample: "no sampled point hit the domain".to_string(),
        };
    }
    CheckStatus::Pass
}

fn check_a2(rho: &Density, opts: &ValidateOptions) -> CheckStatus {
    let mass = rho.total_mass_quadrature(opts.mass_quadrature);
    if (mass - 1.0).abs() > opts.mass_tol {
        CheckStatus::Fail { counterexample: format!("quadrature mass = {mass}") }
    } else {
        CheckStatus::Pass
    }
}
