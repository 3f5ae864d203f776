//! Gradient-flow minimization of the graph energy with semi-implicit
//! convexity splitting, optional clamping, and a hard monotonicity guard.

use crate::cloud::{LabelField, PointCloud};
use crate::energy::{gl_energy_full, gl_gradient_into, FidelitySpec};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::potential::Potential;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Per-step slack allowed on the non-increasing energy trace before the
/// solve aborts with a dt error.
pub const TRACE_MONOTONICITY_SLACK: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum InitScheme {
    /// u_i = (fair +-1 coin) * uniform magnitude in [0, 0.1).
    Random,
    /// Start from a caller-provided field.
    FromField(LabelField),
    /// u_i = tanh(((x_i - point) . normal) / width): a ready-made interface
    /// crossing the given hyperplane. Requires the point cloud.
    SignedDistance { point: Vec<f64>, normal: Vec<f64>, width: f64 },
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub dt: f64,
    pub max_iters: usize,
    /// Stop when ||u_next - u||_inf / dt < tol.
    pub tol: f64,
    /// Splitting constant; the implicit c-term damps the stiff potential.
    pub c: f64,
    pub clamp: bool,
    pub seed: u64,
    pub init: InitScheme,
}

impl SolveOptions {
    /// dt = 0.1*eps and c = L_V/(eps n), plus the fidelity curvature when a
    /// fidelity term is present (2*lambda/n at q=2, the analogous bound
    /// otherwise), so strongly weighted labels do not destabilize the step.
    pub fn defaults_for(g: &SparseGraph, v: &Potential, fid: Option<&FidelitySpec>) -> Self {
        let n = g.n() as f64;
        let mut c = v.lipschitz() / (g.eps() * n);
        if let Some(f) = fid {
            let q = f.q();
            let curvature = if q >= 2.0 {
                f.lambda() * q * (q - 1.0) * 2f64.powf(q - 2.0) / n
            } else {
                f.lambda() * q / n
            };
            c += curvature;
        }
        SolveOptions {
            dt: 0.1 * g.eps(),
            max_iters: 50_000,
            tol: 1e-6,
            c,
            clamp: true,
            seed: 0,
            init: InitScheme::Random,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be finite and > 0, got {}", self.dt)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid("tol must be finite and > 0"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::invalid("splitting constant c must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: LabelField,
    pub iterations: usize,
    /// Objective value at the start and after every step.
    pub energy_trace: Vec<f64>,
    pub converged: bool,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn final_energy(&self) -> f64 {
        *self.energy_trace.last().expect("trace holds at least the initial energy")
    }
}

fn initial_field(
    g: &SparseGraph,
    opts: &SolveOptions,
    cloud: Option<&PointCloud>,
) -> Result<Vec<f64>> {
    let n = g.n();
    match &opts.init {
        InitScheme::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            Ok((0..n)
                .map(|_| {
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    sign * rng.gen_range(0.0..0.1)
                })
                .collect())
        }
        InitScheme::FromField(f) => {
            if f.len() != n {
                return Err(Error::SizeMismatch { context: "initial field", expected: n, got: f.len() });
            }
            Ok(f.values().to_vec())
        }
        InitScheme::SignedDistance { point, normal, width } => {
            let cloud = cloud.ok_or_else(|| {
                Error::invalid("signed-distance init needs the point cloud")
            })?;
            if cloud.len() != n {
                return Err(Error::SizeMismatch { context: "init cloud", expected: n, got: cloud.len() });
            }
            if point.len() != cloud.dim() || normal.len() != cloud.dim() {
                return Err(Error::DimensionMismatch { expected: cloud.dim(), got: point.len().max(normal.len()) });
            }
            if !(width.is_finite() && *width > 0.0) {
                return Err(Error::invalid("signed-distance width must be finite and > 0"));
            }
            Ok(cloud
                .iter()
                .map(|x| {
                    let mut d = 0.0;
                    for k in 0..x.len() {
                        d += (x[k] - point[k]) * normal[k];
                    }
                    (d / width).tanh()
                })
                .collect())
        }
    }
}

/// Runs u_next = u - dt/(1 + c dt) * grad(objective)(u), projected to [-1,1]
/// when clamping is on, until the scaled step norm drops below tol. The
/// energy trace must be non-increasing: a rise beyond the slack aborts with
/// the dt error rather than returning a bogus minimizer.
pub fn minimize(
    g: &SparseGraph,
    p: f64,
    v: &Potential,
    fid: Option<&FidelitySpec>,
    opts: &SolveOptions,
    cloud: Option<&PointCloud>,
) -> Result<SolveResult> {
    opts.check()?;
    let start = Instant::now();
    let n = g.n();
    let mut u = initial_field(g, opts, cloud)?;
    if opts.clamp {
        for x in &mut u {
            *x = x.clamp(-1.0, 1.0);
        }
    }
    let step = opts.dt / (1.0 + opts.c * opts.dt);
    let mut grad = vec![0.0; n];
    let mut field = LabelField::new(u);
    let mut e_prev = gl_energy_full(g, &field, p, v, fid)?.total;
    if !e_prev.is_finite() {
        return Err(Error::Numerical("non-finite energy at the initial field".into()));
    }
    let mut trace = vec![e_prev];
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=opts.max_iters {
        iterations = k;
        gl_gradient_into(g, &field, p, v, fid, &mut grad)?;
        let mut delta: f64 = 0.0;
        {
            let uv = field.values_mut();
            for i in 0..n {
                let gi = grad[i];
                if !gi.is_finite() {
                    return Err(Error::Numerical(format!(
                        "non-finite gradient component at node {i}, iteration {k} (dt too large?)"
                    )));
                }
                let old = uv[i];
                let mut new = old - step * gi;
                if opts.clamp {
                    new = new.clamp(-1.0, 1.0);
                }
                delta = delta.max((new - old).abs());
                uv[i] = new;
            }
        }
        let e = gl_energy_full(g, &field, p, v, fid)?.total;
        if !e.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite energy at iteration {k} (dt too large?)"
            )));
        }
        if e > e_prev + TRACE_MONOTONICITY_SLACK {
            return Err(Error::DtTooLarge { iter: k, increase: e - e_prev });
        }
        trace.push(e);
        e_prev = e;
        if delta / opts.dt < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(SolveResult {
        u: field,
        iterations,
        energy_trace: trace,
        converged,
        wall_time: start.elapsed(),
    })
}

/// Sign thresholding; the tie u = 0 maps to +1.
pub fn threshold(u: &LabelField) -> LabelField {
    LabelField::new(u.values().iter().map(|&x| if x >= 0.0 { 1.0 } else { -1.0 }).collect())
}

/// Fraction of nodes with |u_i| > 0.9.
pub fn phase_purity(u: &LabelField) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    u.values().iter().filter(|x| x.abs() > 0.9).count() as f64 / u.len() as f64
}
