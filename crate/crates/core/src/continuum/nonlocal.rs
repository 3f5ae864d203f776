//! Midpoint-rule evaluation of the intermediate nonlocal functional on
//! a grid field: a kernel-smeared interaction double integral plus the
//! usual potential term, both against the density.

use super::GridField;
use crate::energy::pow_p;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::potential::Potential;
use crate::util::ExactSum;
use rayon::prelude::*;

/// Evaluates
/// `(s_eps / eps) * double-integral eta_eps(x - z) |u(x) - u(z)|^p rho(x) rho(z)
///  + (1 / eps) * integral V(u) rho`
/// over the field's box by the midpoint rule on its grid.
pub fn f_eps_energy(
    gf: &GridField,
    kernel: &Kernel,
    potential: &Potential,
    eps: f64,
    p: f64,
    s_eps: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps must be positive and finite"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid("exponent must be finite and >= 1"));
    }
    if !(s_eps > 0.0 && s_eps.is_finite()) {
        return Err(Error::invalid("interaction weight s_eps must be positive"));
    }
    if kernel.dim() != gf.dim() {
        return Err(Error::DimensionMismatch { expected: gf.dim(), got: kernel.dim() });
    }
    let dim = gf.dim();
    let shape = gf.shape();
    let reach = eps * kernel.support_radius();
    let mut radii = vec![0isize; dim];
    for k in 0..dim {
        let side = gf.domain().hi()[k] - gf.domain().lo()[k];
        if reach > side {
            return Err(Error::invalid(format!(
                "kernel stencil (radius {reach}) exceeds the domain side {side}"
            )));
        }
        radii[k] = (reach / gf.step(k)).ceil() as isize;
    }

    // Offsets are shared by every node: precompute the kernel weight of
    // each and drop the zeros outside the support.
    let inv_eps = 1.0 / eps;
    let kernel_scale = inv_eps.powi(dim as i32);
    let mut offsets: Vec<(Vec<isize>, f64)> = Vec::new();
    let mut o = radii.iter().map(|r| -r).collect::<Vec<isize>>();
    let mut arg = vec![0.0f64; dim];
    'outer: loop {
        for k in 0..dim {
            arg[k] = o[k] as f64 * gf.step(k) * inv_eps;
        }
        let w = kernel_scale * kernel.eval(&arg);
        if w > 0.0 {
            offsets.push((o.clone(), w));
        }
        let mut k = dim;
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            o[k] += 1;
            if o[k] <= radii[k] {
                break;
            }
            o[k] = -radii[k];
        }
    }

    let strides = {
        let mut s = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * shape[k + 1];
        }
        s
    };
    let u = gf.values();
    let rho = gf.density_values();
    let n = gf.len();

    let interaction = (0..n)
        .into_par_iter()
        .fold(ExactSum::new, |mut acc, i| {
            let mut idx = vec![0usize; dim];
            let mut rem = i;
            for k in 0..dim {
                idx[k] = rem / strides[k];
                rem %= strides[k];
            }
            for (off, w) in &offsets {
                let mut j = 0usize;
                let mut ok = true;
                for k in 0..dim {
                    let c = idx[k] as isize + off[k];
                    if c < 0 || c >= shape[k] as isize {
                        ok = false;
                        break;
                    }
                    j += c as usize * strides[k];
                }
                if !ok {
                    continue;
                }
                let du = (u[i] - u[j]).abs();
                if du > 0.0 {
                    acc.add(w * pow_p(du, p) * rho[i] * rho[j]);
                }
            }
            acc
        })
        .reduce(ExactSum::new, |mut a, b| {
            a.merge(&b);
            a
        })
        .value();

    let mut pot = ExactSum::new();
    for i in 0..n {
        pot.add(potential.eval(u[i]) * rho[i]);
    }

    let w = gf.cell_volume();
    let inter_total = interaction * (w * w);
    let pot_total = pot.value() * w;
    Ok(s_eps * (inter_total / eps) + pot_total / eps)
}
