//! The discrete Ginzburg-Landau energy, its gradient, fidelity terms, the
//! image-segmentation composite, and the large-p forms.

use crate::cloud::LabelField;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::potential::Potential;
use crate::util::geom::sign0;
use crate::util::ExactSum;
use rayon::prelude::*;
use serde::Serialize;

/// |x|^p for x >= 0, routed through powi for integer p. The p = 2 shortcut
/// matters: it is the hot path of every gradient-flow iteration.
#[inline]
pub(crate) fn pow_p(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x
    } else if p.fract() == 0.0 && (1.0..=512.0).contains(&p) {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("exponent p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

fn check_sizes(g: &SparseGraph, u: &LabelField) -> Result<()> {
    if u.len() != g.n() {
        return Err(Error::SizeMismatch { context: "label field", expected: g.n(), got: u.len() });
    }
    Ok(())
}

/// Labeled nodes with targets, weight, and exponent for the fidelity term
/// (1/n) * sum_{i in I} lambda * |y_i - u_i|^q.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySpec {
    indices: Vec<usize>,
    targets: Vec<f64>,
    lambda: f64,
    q: f64,
    beta: f64,
}

impl FidelitySpec {
    pub fn new(indices: Vec<usize>, targets: Vec<f64>, lambda: f64, q: f64) -> Result<Self> {
        if indices.len() != targets.len() {
            return Err(Error::SizeMismatch {
                context: "fidelity targets",
                expected: indices.len(),
                got: targets.len(),
            });
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::invalid(format!("q must be finite and >= 1, got {q}")));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("fidelity targets must be finite"));
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate labeled index"));
        }
        Ok(FidelitySpec { indices, targets, lambda, q, beta: 1.0 })
    }

    /// Sets the cap constant used by the growth check.
    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid(format!("beta must be finite and > 0, got {beta}")));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn check_indices(&self, n: usize) -> Result<()> {
        match self.indices.iter().max() {
            Some(&m) if m >= n => {
                Err(Error::invalid(format!("labeled index {m} out of range for n={n}")))
            }
            _ => Ok(()),
        }
    }

    /// Samples the cap bound lambda*|y_i - u|^q <= beta*(1 + |u|^q) over a
    /// grid of u values. Returns the first counterexample.
    pub fn cap_counterexample(&self, u_range: f64) -> Option<String> {
        let steps = 400;
        for k in 0..=steps {
            let u = -u_range + 2.0 * u_range * k as f64 / steps as f64;
            for (&_i, &y) in self.indices.iter().zip(&self.targets) {
                let lhs = self.lambda * pow_p((y - u).abs(), self.q);
                let rhs = self.beta * (1.0 + pow_p(u.abs(), self.q));
                if lhs > rhs {
                    return Some(format!("lambda*|{y} - {u}|^q = {lhs} > {rhs}"));
                }
            }
        }
        None
    }
}

/// The three additive pieces of the objective. `total` is computed as
/// (interaction + potential) + fidelity, in that fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub interaction: f64,
    pub potential: f64,
    pub fidelity: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn assemble(interaction: f64, potential: f64, fidelity: f64) -> Self {
        EnergyBreakdown {
            interaction,
            potential,
            fidelity,
            total: (interaction + potential) + fidelity,
        }
    }

    pub fn report(&self, n: usize, eps: f64, p: f64) -> EnergyReport {
        EnergyReport {
            interaction: self.interaction,
            potential: self.potential,
            fidelity: self.fidelity,
            total: self.total,
            n,
            eps,
            p,
        }
    }
}

/// JSON-facing energy record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub interaction: f64,
    pub potential: f64,
    pub fidelity: f64,
    pub total: f64,
    pub n: usize,
    pub eps: f64,
    pub p: f64,
}

/// Evaluates (1/(eps n^2)) sum_ij W_ij |u_i - u_j|^p + (1/(eps n)) sum_i V(u_i).
///
/// Per-term products are accumulated exactly, so the result is independent of
/// node order and thread count down to the last bit.
pub fn gl_energy(g: &SparseGraph, u: &LabelField, p: f64, v: &Potential) -> Result<EnergyBreakdown> {
    gl_energy_full(g, u, p, v, None)
}

pub fn gl_energy_full(
    g: &SparseGraph,
    u: &LabelField,
    p: f64,
    v: &Potential,
    fid: Option<&FidelitySpec>,
) -> Result<EnergyBreakdown> {
    check_p(p)?;
    check_sizes(g, u)?;
    if let Some(f) = fid {
        f.check_indices(g.n())?;
    }
    let n = g.n();
    let uv = u.values();
    let fold_node = |acc: (ExactSum, ExactSum), i: usize| {
        let (mut inter, mut pot) = acc;
        let (cols, ws) = g.row(i);
        let ui = uv[i];
        for (c, w) in cols.iter().zip(ws) {
            let d = (ui - uv[*c as usize]).abs();
            inter.add(w * pow_p(d, p));
        }
        pot.add(v.eval(ui));
        (inter, pot)
    };
    let (inter, pot) = if n >= 1024 {
        (0..n)
            .into_par_iter()
            .fold(|| (ExactSum::new(), ExactSum::new()), fold_node)
            .reduce(
                || (ExactSum::new(), ExactSum::new()),
                |(mut a1, mut a2), (b1, b2)| {
                    a1.merge(&b1);
                    a2.merge(&b2);
                    (a1, a2)
                },
            )
    } else {
        (0..n).fold((ExactSum::new(), ExactSum::new()), fold_node)
    };
    let nf = n as f64;
    let interaction = inter.value() / (g.eps() * nf * nf);
    let potential = pot.value() / (g.eps() * nf);
    let fidelity = match fid {
        Some(f) => fidelity_energy(f, u)?,
        None => 0.0,
    };
    Ok(EnergyBreakdown::assemble(interaction, potential, fidelity))
}

/// (1/n) sum_{i in I} lambda |y_i - u_i|^q.
pub fn fidelity_energy(spec: &FidelitySpec, u: &LabelField) -> Result<f64> {
    spec.check_indices(u.len())?;
    let uv = u.values();
    let mut acc = ExactSum::new();
    for (&i, &y) in spec.indices.iter().zip(&spec.targets) {
        acc.add(spec.lambda * pow_p((y - uv[i]).abs(), spec.q));
    }
    Ok(acc.value() / u.len() as f64)
}

/// Gradient of gl_energy (+ fidelity if given), written into `out`.
///
/// Component k is (2p/(eps n^2)) sum_j W_kj |u_k - u_j|^{p-1} sign(u_k - u_j)
/// + (1/(eps n)) V'(u_k), the factor 2 coming from the symmetric double sum.
/// At p = 1 ties contribute 0 (minimal-norm subgradient).
pub fn gl_gradient_into(
    g: &SparseGraph,
    u: &LabelField,
    p: f64,
    v: &Potential,
    fid: Option<&FidelitySpec>,
    out: &mut [f64],
) -> Result<()> {
    check_p(p)?;
    check_sizes(g, u)?;
    if out.len() != g.n() {
        return Err(Error::SizeMismatch { context: "gradient buffer", expected: g.n(), got: out.len() });
    }
    if let Some(f) = fid {
        f.check_indices(g.n())?;
    }
    let n = g.n();
    let nf = n as f64;
    let uv = u.values();
    let inter_scale = 2.0 * p / (g.eps() * nf * nf);
    let pot_scale = 1.0 / (g.eps() * nf);
    let pm1 = p - 1.0;
    let node_grad = |k: usize| -> f64 {
        let (cols, ws) = g.row(k);
        let uk = uv[k];
        let mut s = 0.0;
        for (c, w) in cols.iter().zip(ws) {
            let d = uk - uv[*c as usize];
            let sg = sign0(d);
            if sg != 0.0 {
                s += w * pow_p(d.abs(), pm1) * sg;
            }
        }
        inter_scale * s + pot_scale * v.deriv(uk)
    };
    if n >= 1024 {
        out.par_iter_mut().enumerate().for_each(|(k, o)| *o = node_grad(k));
    } else {
        for (k, o) in out.iter_mut().enumerate() {
            *o = node_grad(k);
        }
    }
    if let Some(f) = fid {
        let fid_scale = f.lambda * f.q / nf;
        for (&i, &y) in f.indices.iter().zip(&f.targets) {
            let d = uv[i] - y;
            let sg = sign0(d);
            if sg != 0.0 {
                out[i] += fid_scale * pow_p(d.abs(), f.q - 1.0) * sg;
            }
        }
    }
    Ok(())
}

pub fn gl_gradient(g: &SparseGraph, u: &LabelField, p: f64, v: &Potential) -> Result<Vec<f64>> {
    let mut out = vec![0.0; g.n()];
    gl_gradient_into(g, u, p, v, None, &mut out)?;
    Ok(out)
}

/// (lambda/2) sum_{i in I} |f_i - u_i|^2 + gl_energy total: the composite
/// objective for scribble-seeded segmentation.
pub fn segmentation_objective(
    g: &SparseGraph,
    u: &LabelField,
    p: f64,
    v: &Potential,
    labeled: &[(usize, f64)],
    lambda: f64,
) -> Result<f64> {
    check_sizes(g, u)?;
    let uv = u.values();
    let mut acc = ExactSum::new();
    for &(i, f) in labeled {
        if i >= g.n() {
            return Err(Error::invalid(format!("labeled index {i} out of range for n={}", g.n())));
        }
        let d = f - uv[i];
        acc.add(d * d);
    }
    let gl = gl_energy(g, u, p, v)?;
    Ok(0.5 * lambda * acc.value() + gl.total)
}

/// max( max_ij W_ij |u_i - u_j| , (1/eps) max_i V(u_i) ).
pub fn gl_infinity_energy(g: &SparseGraph, u: &LabelField, v: &Potential) -> Result<f64> {
    check_sizes(g, u)?;
    let uv = u.values();
    let mut m: f64 = 0.0;
    for i in 0..g.n() {
        let (cols, ws) = g.row(i);
        for (c, w) in cols.iter().zip(ws) {
            m = m.max(w * (uv[i] - uv[*c as usize]).abs());
        }
        m = m.max(v.eval(uv[i]) / g.eps());
    }
    Ok(m)
}

/// [ (1/(eps n^2)) sum W^p |du|^p + (1/(eps^p n)) sum V^p ]^{1/p}, evaluated
/// with the max term factored out first so large p cannot overflow.
pub fn gl_tilde_energy(g: &SparseGraph, u: &LabelField, p: f64, v: &Potential) -> Result<f64> {
    check_p(p)?;
    check_sizes(g, u)?;
    let m = gl_infinity_energy(g, u, v)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    let n = g.n();
    let nf = n as f64;
    let uv = u.values();
    let mut inter = ExactSum::new();
    let mut pot = ExactSum::new();
    for i in 0..n {
        let (cols, ws) = g.row(i);
        for (c, w) in cols.iter().zip(ws) {
            let ratio = w * (uv[i] - uv[*c as usize]).abs() / m;
            inter.add(ratio.powf(p));
        }
        let ratio = v.eval(uv[i]) / (g.eps() * m);
        pot.add(ratio.powf(p));
    }
    let s = inter.value() / (g.eps() * nf * nf) + pot.value() / nf;
    Ok(m * s.powf(1.0 / p))
}
