//! Subcommand implementations. Each takes its parsed config plus the shared
//! run context and writes artifacts into the output directory.

pub mod bean;
pub mod cell;
pub mod converge;
pub mod graph;
pub mod minimize;
pub mod segment;
pub mod validate;

use crate::config::{InitCfg, SolverCfg};
use crate::error::{CliError, Result};
use crate::provenance::Provenance;
use pgl_core::{
    minimize as core_minimize, FidelitySpec, InitScheme, LabelField, PointCloud, Potential,
    SolveOptions, SolveResult, SparseGraph,
};
use std::path::{Path, PathBuf};

/// Everything a command needs besides its own config.
pub struct RunContext {
    pub out: PathBuf,
    pub seed: u64,
    pub provenance: Provenance,
}

impl RunContext {
    pub fn out(&self) -> &Path {
        &self.out
    }
}

pub fn init_scheme(cfg: &InitCfg, n: usize) -> Result<InitScheme> {
    Ok(match cfg {
        InitCfg::Random => InitScheme::Random,
        InitCfg::Constant { value } => InitScheme::FromField(LabelField::constant(n, *value)),
        InitCfg::Plane { point, normal, width } => InitScheme::SignedDistance {
            point: point.clone(),
            normal: normal.clone(),
            width: *width,
        },
        InitCfg::File { path } => {
            InitScheme::FromField(LabelField::read_csv_path(Path::new(path))?)
        }
    })
}

pub fn solve_options(
    cfg: &SolverCfg,
    g: &SparseGraph,
    v: &Potential,
    fid: Option<&FidelitySpec>,
    seed: u64,
) -> Result<SolveOptions> {
    let mut opts = SolveOptions::defaults_for(g, v, fid);
    if let Some(dt) = cfg.dt {
        opts.dt = dt;
    }
    if let Some(c) = cfg.c {
        opts.c = c;
    }
    opts.max_iters = cfg.max_iters;
    opts.tol = cfg.tol;
    opts.clamp = cfg.clamp;
    opts.seed = seed;
    opts.init = init_scheme(&cfg.init, g.n())?;
    Ok(opts)
}

/// Minimizes with the dt-halving retry loop: an unstable step aborts the
/// solve, we halve dt and start over, up to `retries` times. The final
/// failure propagates as a numerical error.
pub fn minimize_with_retry(
    g: &SparseGraph,
    p: f64,
    v: &Potential,
    fid: Option<&FidelitySpec>,
    opts: &SolveOptions,
    cloud: Option<&PointCloud>,
    retries: u32,
) -> Result<SolveResult> {
    let mut opts = opts.clone();
    let mut attempt = 0;
    loop {
        match core_minimize(g, p, v, fid, &opts, cloud) {
            Ok(res) => return Ok(res),
            Err(e @ (pgl_core::Error::DtTooLarge { .. } | pgl_core::Error::Numerical(_))) => {
                if attempt >= retries {
                    return Err(CliError::Numerical(format!(
                        "{e} (after {attempt} dt halvings, dt = {})",
                        opts.dt
                    )));
                }
                attempt += 1;
                opts.dt *= 0.5;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Largest time step the explicit part of the splitting tolerates on this
/// graph, estimated from the field the solve will start from. The effective
/// step is dt/(1 + c dt), so the curvature absorbed by c can be bought back:
/// we target half the stability bound 2/L and invert the splitting map.
/// Gershgorin on the interaction Hessian gives L from twice the worst row
/// sum of W_ij |u_i - u_j|^{p-2}. Degenerate exponents (p < 2) have no such
/// bound; those fall back to the library default.
pub fn stable_dt(
    g: &SparseGraph,
    u: &[f64],
    p: f64,
    v: &Potential,
    fid: Option<&FidelitySpec>,
) -> f64 {
    const DT_CAP: f64 = 100.0;
    let defaults = SolveOptions::defaults_for(g, v, fid);
    if p < 2.0 {
        return defaults.dt;
    }
    let n = g.n();
    let mut worst_row = 0.0f64;
    for i in 0..n {
        let (cols, weights) = g.row(i);
        let mut s = 0.0;
        for (&j, &w) in cols.iter().zip(weights) {
            let d = (u[i] - u[j as usize]).abs();
            s += if p == 2.0 { w } else { w * d.powf(p - 2.0) };
        }
        worst_row = worst_row.max(s);
    }
    let scale = g.eps() * (n as f64) * (n as f64);
    let l_int = 2.0 * (2.0 * p * (p - 1.0) / scale) * worst_row;
    let l_hat = l_int + defaults.c;
    if !(l_hat.is_finite() && l_hat > 0.0) {
        return DT_CAP;
    }
    let e = 1.0 / l_hat;
    if defaults.c * e >= 1.0 {
        DT_CAP
    } else {
        (e / (1.0 - defaults.c * e)).min(DT_CAP)
    }
}

/// Formats an exponent for file names: integral values lose the ".0".
pub fn p_tag(p: f64) -> String {
    if p.fract() == 0.0 && p.abs() < 1e6 {
        format!("{}", p as i64)
    } else {
        format!("{p}").replace('.', "_")
    }
}
