//! One-dimensional cell problem for the surface tension: minimize the
//! reduced transition energy over profiles f: R -> [-1, 1] with f = -1
//! far left and f = +1 far right, after collapsing the kernel onto the
//! interface normal.

use super::marginal::{marginal_kernel, MarginalKernel};
use super::Profile1D;
use crate::energy::pow_p;
use crate::util::geom::sign0;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::potential::Potential;

/// Discretization and stopping controls for the profile optimizer.
#[derive(Debug, Clone)]
pub struct ProfileOptions {
    /// Half-width of the truncation window; the profile is pinned to
    /// the constants -1 and +1 outside [-l, l].
    pub l: f64,
    /// Number of profile nodes across the window.
    pub m: usize,
    pub max_iters: usize,
    /// Sup-norm threshold on the projected gradient step.
    pub tol: f64,
    /// Quadrature resolution handed to the kernel marginalization.
    pub quad_pts: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { l: 10.0, m: 400, max_iters: 2000, tol: 1e-7, quad_pts: 1024 }
    }
}

/// Outcome of a surface-tension solve.
#[derive(Debug, Clone)]
pub struct SigmaResult {
    value: f64,
    profile: Profile1D,
    converged: bool,
}

impl SigmaResult {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn profile(&self) -> &Profile1D {
        &self.profile
    }

    pub fn converged(&self) -> bool {
        self.converged
    }
}

struct CellProblem<'a> {
    rho_x: f64,
    h: f64,
    // Marginal kernel sampled at offsets j*h for j = 0..=j_max. The
    // kernels available here are all radially symmetric, so the
    // marginal is even and one sign of j carries the whole table.
    eta: Vec<f64>,
    j_max: usize,
    p: f64,
    potential: &'a Potential,
}

fn ext(f: &[f64], i: isize) -> f64 {
    if i < 0 {
        -1.0
    } else if i as usize >= f.len() {
        1.0
    } else {
        f[i as usize]
    }
}

impl CellProblem<'_> {
    fn energy(&self, f: &[f64]) -> f64 {
        let m = f.len() as isize;
        let j_max = self.j_max as isize;
        let mut inter = 0.0;
        for j in 1..=j_max {
            let w = self.eta[j as usize];
            if w <= 0.0 {
                continue;
            }
            let mut row = 0.0;
            for i in -j_max..m + j_max {
                let d = (ext(f, i + j) - ext(f, i)).abs();
                if d > 0.0 {
                    row += pow_p(d, self.p);
                }
            }
            inter += w * row;
        }
        let mut pot = 0.0;
        for &v in f {
            pot += self.potential.eval(v);
        }
        self.rho_x * self.h * self.h * 2.0 * inter + self.h * pot
    }

    /// Gradient with respect to the interior nodes; the pinned
    /// endpoints always get a zero entry.
    fn gradient(&self, f: &[f64], g: &mut [f64]) {
        let m = f.len();
        let j_max = self.j_max as isize;
        let scale = self.rho_x * self.h * self.h * 2.0 * self.p;
        for k in 0..m {
            g[k] = 0.0;
            if k == 0 || k == m - 1 {
                continue;
            }
            let fk = f[k];
            let ki = k as isize;
            let mut acc = 0.0;
            for j in 1..=j_max {
                let w = self.eta[j as usize];
                if w <= 0.0 {
                    continue;
                }
                let right = fk - ext(f, ki + j);
                let left = fk - ext(f, ki - j);
                acc += w
                    * (pow_p(right.abs(), self.p - 1.0) * sign0(right)
                        + pow_p(left.abs(), self.p - 1.0) * sign0(left));
            }
            g[k] = scale * acc + self.h * self.potential.deriv(fk);
        }
    }
}

fn project(f: &mut [f64]) {
    let m = f.len();
    for v in f.iter_mut() {
        *v = v.clamp(-1.0, 1.0);
    }
    f[0] = -1.0;
    f[m - 1] = 1.0;
}

/// Computes the surface tension at local density `rho_x` for an
/// interface with unit normal `nu`, by projected Barzilai-Borwein
/// descent over truncated transition profiles.
pub fn cell_sigma(
    rho_x: f64,
    nu: &[f64],
    kernel: &Kernel,
    potential: &Potential,
    p: f64,
    opts: &ProfileOptions,
) -> Result<SigmaResult> {
    if !(rho_x > 0.0 && rho_x.is_finite()) {
        return Err(Error::invalid("density value must be positive and finite"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid("exponent must be finite and >= 1"));
    }
    if !(opts.l > 0.0 && opts.l.is_finite()) {
        return Err(Error::invalid("profile half-width must be positive"));
    }
    if opts.m < 3 {
        return Err(Error::invalid("profile needs at least three nodes"));
    }
    if opts.max_iters == 0 || !(opts.tol > 0.0) {
        return Err(Error::invalid("iteration budget and tolerance must be positive"));
    }
    // The transverse quadrature is two-dimensional in 3-D; cap the
    // per-axis count there so marginalization stays around 10^7 evals.
    let quad = if kernel.dim() >= 3 { opts.quad_pts.min(256) } else { opts.quad_pts };
    let mk = marginal_kernel(kernel, nu, quad)?;
    let h = 2.0 * opts.l / (opts.m - 1) as f64;
    let j_max = (mk.radius() / h).ceil() as usize;
    let eta = (0..=j_max).map(|j| mk.eval(j as f64 * h)).collect::<Vec<f64>>();
    let prob = CellProblem { rho_x, h, eta, j_max, p, potential };

    // At p = 1 the inner interaction sums telescope, so every
    // nondecreasing profile pays the same interaction and the pinned
    // step field is a global minimizer: it also zeroes the potential.
    // Descent methods stall on the kinks here, so solve it directly.
    if p == 1.0 {
        let step_field: Vec<f64> = (0..opts.m)
            .map(|i| if -opts.l + i as f64 * h < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let value = prob.energy(&step_field);
        let profile = Profile1D::new(opts.l, step_field)?;
        return Ok(SigmaResult { value, profile, converged: true });
    }

    let mut f = Profile1D::tanh_init(opts.l, opts.m)?.values().to_vec();
    let m = f.len();
    let mut g = vec![0.0f64; m];
    let mut g_new = vec![0.0f64; m];
    let mut trial = vec![0.0f64; m];
    let mut energy = prob.energy(&f);
    prob.gradient(&f, &mut g);
    let mut step = 0.1;
    let mut converged = false;

    for _ in 0..opts.max_iters {
        // Stationarity check on the unit-step projected gradient.
        let mut stat = 0.0f64;
        for k in 0..m {
            let moved = (f[k] - g[k]).clamp(-1.0, 1.0);
            stat = stat.max((moved - f[k]).abs());
        }
        if stat < opts.tol {
            converged = true;
            break;
        }

        for k in 0..m {
            trial[k] = f[k] - step * g[k];
        }
        project(&mut trial);
        let mut descent = 0.0;
        for k in 0..m {
            trial[k] -= f[k];
            descent += g[k] * trial[k];
        }
        if descent >= 0.0 {
            // The projected direction is not a descent direction, so
            // the BB step has gone stale; reset and retry.
            step = 1e-4;
            continue;
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            for k in 0..m {
                g_new[k] = f[k] + alpha * trial[k];
            }
            let e_new = prob.energy(&g_new);
            if e_new <= energy + 1e-4 * alpha * descent {
                energy = e_new;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
        let prev_f = f.clone();
        f.copy_from_slice(&g_new);
        prob.gradient(&f, &mut g_new);

        let mut ss = 0.0;
        let mut sy = 0.0;
        for k in 0..m {
            let s = f[k] - prev_f[k];
            let y = g_new[k] - g[k];
            ss += s * s;
            sy += s * y;
        }
        std::mem::swap(&mut g, &mut g_new);
        step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e6) } else { 1.0 };
    }

    // An optimal profile is nondecreasing; if descent left any ripple,
    // sorting removes it without raising either energy term.
    if f.windows(2).any(|w| w[1] < w[0] - 1e-12) {
        let mut sorted = f.clone();
        sorted.sort_by(f64::total_cmp);
        let e_sorted = prob.energy(&sorted);
        if e_sorted <= energy {
            f = sorted;
            energy = e_sorted;
        }
    }

    let profile = Profile1D::new(opts.l, f)?;
    Ok(SigmaResult { value: energy, profile, converged })
}

/// Shared with the perimeter assembly: the marginal's first absolute
/// moment drives the hard-interface prediction.
pub(super) fn hard_profile_value(rho_x: f64, p: f64, mk: &MarginalKernel) -> f64 {
    rho_x * pow_p(2.0, p) * mk.abs_first_moment()
}
