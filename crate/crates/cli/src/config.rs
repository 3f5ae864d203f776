//! Config schema and builders.
//!
//! Configs are TOML with a strict schema: unknown keys are rejected, because
//! a silently ignored typo ("lamda = 100") would corrupt an experiment
//! without any visible failure. Every command has its own top-level struct;
//! shared fragments (kernel, potential, density, solver) are reused across
//! them.

use crate::error::{CliError, Result};
use pgl_core::{
    BoxDomain, Density, FidelitySpec, Kernel, KernelShape, MaskGrid, PointCloud, Potential,
    ProfileOptions, SparseGraph,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn de<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Parses a command config from an optional file. No file means defaults.
pub fn load<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            de(&text)
        }
    }
}

/// Canonical serialization of the effective config; hashed into provenance.
pub fn canonical<T: Serialize>(cfg: &T) -> Result<String> {
    toml::to_string(cfg).map_err(|e| CliError::Config(format!("config serialization: {e}")))
}

// ---------------------------------------------------------------------------
// shared fragments

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelCfg {
    Ball { radius: f64 },
    Gaussian { bandwidth: f64, cutoff: f64 },
    Box { half_widths: Vec<f64> },
    Ellipsoid { semi_axes: Vec<f64> },
    Shell { inner: f64, outer: f64 },
}

impl Default for KernelCfg {
    fn default() -> Self {
        KernelCfg::Ball { radius: 1.0 }
    }
}

impl KernelCfg {
    pub fn build(&self, dim: usize) -> Result<Kernel> {
        let shape = match self {
            KernelCfg::Ball { radius } => KernelShape::BallIndicator { radius: *radius },
            KernelCfg::Gaussian { bandwidth, cutoff } => KernelShape::TruncatedGaussian {
                bandwidth: *bandwidth,
                cutoff: *cutoff,
            },
            KernelCfg::Box { half_widths } => KernelShape::AnisotropicIndicator {
                body: pgl_core::ConvexBody::Box { half_widths: half_widths.clone() },
            },
            KernelCfg::Ellipsoid { semi_axes } => KernelShape::AnisotropicIndicator {
                body: pgl_core::ConvexBody::Ellipsoid { semi_axes: semi_axes.clone() },
            },
            KernelCfg::Shell { inner, outer } => {
                KernelShape::ShellIndicator { inner: *inner, outer: *outer }
            }
        };
        Ok(Kernel::new(shape, dim)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialCfg {
    Quartic,
    Tabulated {
        knots: Vec<f64>,
        values: Vec<f64>,
        tau: f64,
        r_v: f64,
        lipschitz: f64,
    },
}

impl Default for PotentialCfg {
    fn default() -> Self {
        PotentialCfg::Quartic
    }
}

impl PotentialCfg {
    pub fn build(&self) -> Result<Potential> {
        match self {
            PotentialCfg::Quartic => Ok(Potential::quartic()),
            PotentialCfg::Tabulated { knots, values, tau, r_v, lipschitz } => Ok(
                Potential::tabulated(knots.clone(), values.clone(), *tau, *r_v, *lipschitz)?,
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityCfg {
    Uniform {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Gaussian profile along one axis on a plain box.
    GaussianMarginal {
        mean: f64,
        stddev: f64,
        axis: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// The bean-study domain; see [`crate::commands::bean`] for the shape.
    Bean {
        #[serde(default = "default_bean_resolution")]
        mask_resolution: Vec<usize>,
    },
}

fn default_bean_resolution() -> Vec<usize> {
    vec![630, 180]
}

impl Default for DensityCfg {
    fn default() -> Self {
        DensityCfg::Uniform { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] }
    }
}

impl DensityCfg {
    pub fn build(&self) -> Result<Density> {
        match self {
            DensityCfg::Uniform { lo, hi } => {
                Ok(Density::uniform(BoxDomain::new(lo.clone(), hi.clone())?))
            }
            DensityCfg::GaussianMarginal { mean, stddev, axis, lo, hi } => {
                let domain = BoxDomain::new(lo.clone(), hi.clone())?;
                let shape = vec![1usize; domain.dim()];
                let mask = MaskGrid::from_fn(domain, shape, |_| true)?;
                Ok(Density::gaussian_marginal(*mean, *stddev, *axis, mask)?)
            }
            DensityCfg::Bean { mask_resolution } => {
                crate::commands::bean::bean_density(mask_resolution)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointsCfg {
    File { path: String },
    Sample { density: DensityCfg, n: usize },
}

impl Default for PointsCfg {
    fn default() -> Self {
        PointsCfg::Sample { density: DensityCfg::default(), n: 1000 }
    }
}

impl PointsCfg {
    /// Loads or samples the cloud. Sampling draws from a ChaCha stream
    /// seeded by the effective run seed, so reruns are reproducible.
    pub fn realize(&self, seed: u64) -> Result<PointCloud> {
        use rand::SeedableRng;
        match self {
            PointsCfg::File { path } => {
                Ok(PointCloud::read_csv_path(Path::new(path))?)
            }
            PointsCfg::Sample { density, n } => {
                let rho = density.build()?;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                Ok(rho.sample(*n, &mut rng)?)
            }
        }
    }
}

/// Neighborhood radius: either a fixed value or the point-cloud rule
/// eps = scale * (log n / n)^(1/d).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphCfg {
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub eps_scale: Option<f64>,
}

impl Default for GraphCfg {
    fn default() -> Self {
        GraphCfg { eps: None, eps_scale: None }
    }
}

impl GraphCfg {
    pub fn eps_for(&self, n: usize, dim: usize) -> Result<f64> {
        match (self.eps, self.eps_scale) {
            (Some(_), Some(_)) => Err(CliError::config(
                "set either graph.eps or graph.eps_scale, not both",
            )),
            (Some(e), None) => Ok(e),
            (None, scale) => {
                let c = scale.unwrap_or(2.0);
                if n < 2 {
                    return Err(CliError::config(
                        "the eps rule needs n >= 2; set graph.eps explicitly",
                    ));
                }
                let nf = n as f64;
                Ok(c * (nf.ln() / nf).powf(1.0 / dim as f64))
            }
        }
    }
}

pub fn build_cloud_graph(
    cloud: &PointCloud,
    kernel_cfg: &KernelCfg,
    graph_cfg: &GraphCfg,
) -> Result<(SparseGraph, f64)> {
    let kernel = kernel_cfg.build(cloud.dim())?;
    let eps = graph_cfg.eps_for(cloud.len(), cloud.dim())?;
    let g = pgl_core::build_graph(cloud, &kernel, eps)?;
    Ok((g, eps))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitCfg {
    Random,
    Constant { value: f64 },
    Plane { point: Vec<f64>, normal: Vec<f64>, width: f64 },
    File { path: String },
}

impl Default for InitCfg {
    fn default() -> Self {
        InitCfg::Random
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverCfg {
    /// Explicit time step; the default is the 0.1*eps rule.
    pub dt: Option<f64>,
    /// Explicit splitting constant; the default is the curvature rule.
    pub c: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    pub clamp: bool,
    pub init: InitCfg,
    /// On an unstable-step abort, halve dt and rerun, at most this often.
    pub dt_retries: u32,
}

impl Default for SolverCfg {
    fn default() -> Self {
        SolverCfg {
            dt: None,
            c: None,
            max_iters: 50_000,
            tol: 1e-6,
            clamp: true,
            init: InitCfg::Random,
            dt_retries: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallLabelCfg {
    pub center: Vec<f64>,
    pub radius: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelityCfg {
    pub lambda: f64,
    pub q: f64,
    /// Label every point inside each ball with the ball's target.
    pub balls: Vec<BallLabelCfg>,
    /// Explicit index/target pairs, appended after the ball labels.
    pub indices: Vec<usize>,
    pub targets: Vec<f64>,
}

impl Default for FidelityCfg {
    fn default() -> Self {
        FidelityCfg {
            lambda: 100.0,
            q: 2.0,
            balls: Vec::new(),
            indices: Vec::new(),
            targets: Vec::new(),
        }
    }
}

impl FidelityCfg {
    pub fn is_empty(&self) -> bool {
        self.balls.is_empty() && self.indices.is_empty()
    }

    pub fn build(&self, cloud: &PointCloud) -> Result<FidelitySpec> {
        if self.indices.len() != self.targets.len() {
            return Err(CliError::config(format!(
                "fidelity.indices has {} entries but fidelity.targets has {}",
                self.indices.len(),
                self.targets.len()
            )));
        }
        let mut indices = Vec::new();
        let mut targets = Vec::new();
        for ball in &self.balls {
            if ball.center.len() != cloud.dim() {
                return Err(CliError::config(format!(
                    "fidelity ball center has dim {}, points have dim {}",
                    ball.center.len(),
                    cloud.dim()
                )));
            }
            let r2 = ball.radius * ball.radius;
            for (i, x) in cloud.iter().enumerate() {
                let d2: f64 = x
                    .iter()
                    .zip(&ball.center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d2 <= r2 {
                    indices.push(i);
                    targets.push(ball.target);
                }
            }
        }
        indices.extend_from_slice(&self.indices);
        targets.extend_from_slice(&self.targets);
        if indices.is_empty() {
            return Err(CliError::config(
                "fidelity requested but no point falls in any ball and no indices given",
            ));
        }
        Ok(FidelitySpec::new(indices, targets, self.lambda, self.q)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileCfg {
    pub l: f64,
    pub m: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub quad_pts: usize,
}

impl Default for ProfileCfg {
    fn default() -> Self {
        let d = ProfileOptions::default();
        ProfileCfg { l: d.l, m: d.m, max_iters: d.max_iters, tol: d.tol, quad_pts: d.quad_pts }
    }
}

impl ProfileCfg {
    pub fn build(&self) -> ProfileOptions {
        ProfileOptions {
            l: self.l,
            m: self.m,
            max_iters: self.max_iters,
            tol: self.tol,
            quad_pts: self.quad_pts,
        }
    }
}

// ---------------------------------------------------------------------------
// per-command configs

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GraphCmdCfg {
    pub points: PointsCfg,
    pub kernel: KernelCfg,
    pub graph: GraphCfg,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MinimizeCfg {
    pub points: PointsCfg,
    pub kernel: KernelCfg,
    pub graph: GraphCfg,
    pub potential: PotentialCfg,
    pub p: P,
    pub solver: SolverCfg,
    pub fidelity: Option<FidelityCfg>,
    pub seed: u64,
}

/// Newtype so the exponent can default to 2 wherever it appears.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct P(pub f64);

impl Default for P {
    fn default() -> Self {
        P(2.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentCfg {
    pub image: String,
    pub mask: String,
    pub tau_color: f64,
    /// Defaults to 1/sqrt(n) over the pixel count when unset.
    pub eps: Option<f64>,
    pub p: P,
    pub lambda: f64,
    pub potential: PotentialCfg,
    pub solver: SolverCfg,
    pub seed: u64,
}

impl Default for SegmentCfg {
    fn default() -> Self {
        SegmentCfg {
            image: String::new(),
            mask: String::new(),
            tau_color: 5e-4,
            eps: None,
            p: P(2.0),
            lambda: 100.0,
            potential: PotentialCfg::Quartic,
            // scribble information spreads from a neutral field; a random
            // start would have to out-diffuse its own noise first
            solver: SolverCfg { init: InitCfg::Constant { value: 0.0 }, ..SolverCfg::default() },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeanCfg {
    pub n: usize,
    pub p_list: Vec<f64>,
    pub seeds: u64,
    pub seed: u64,
    pub kernel: KernelCfg,
    pub graph: GraphCfg,
    pub potential: PotentialCfg,
    pub lambda: f64,
    pub q: f64,
    pub solver: SolverCfg,
    pub mask_resolution: Vec<usize>,
    /// Run a second flow from a planar ramp across the neck in addition to
    /// the random start, and keep whichever ends at lower objective. Local
    /// gradient flow cannot hop basins on its own, and the basins the two
    /// exponents prefer are different ones.
    pub multistart: bool,
    /// Coarsen the random start on a unit-ball kernel of equal reach first,
    /// then refine on the experiment kernel. With the default small-radius
    /// kernel the interface is thin against the sample spacing and a flow
    /// started from noise pins early in the wrong place.
    pub continuation: bool,
    pub write_fields: bool,
}

impl Default for BeanCfg {
    fn default() -> Self {
        BeanCfg {
            n: 1000,
            p_list: vec![2.0, 100.0],
            seeds: 10,
            seed: 0,
            // a small kernel radius at a wider eps keeps the graph reach
            // (radius * eps ~ 0.066) while thinning the phase interface,
            // whose width scales with radius * reach * sqrt(density); the
            // fields stay sharp enough to call the phases at n = 1000
            kernel: KernelCfg::Ball { radius: 0.2 },
            graph: GraphCfg { eps: None, eps_scale: Some(4.0) },
            potential: PotentialCfg::Quartic,
            lambda: 100.0,
            q: 2.0,
            solver: SolverCfg::default(),
            mask_resolution: default_bean_resolution(),
            multistart: true,
            continuation: true,
            write_fields: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeCfg {
    pub n_list: Vec<usize>,
    pub seeds: u64,
    pub seed: u64,
    pub eps_scale: f64,
    pub p: f64,
    pub kernel: KernelCfg,
    pub potential: PotentialCfg,
    pub density: DensityCfg,
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

impl Default for ConvergeCfg {
    fn default() -> Self {
        ConvergeCfg {
            n_list: vec![1000, 4000, 16000],
            seeds: 10,
            seed: 0,
            eps_scale: 4.0,
            p: 1.0,
            kernel: KernelCfg::default(),
            potential: PotentialCfg::Quartic,
            density: DensityCfg::default(),
            point: vec![0.5, 0.5],
            normal: vec![1.0, 0.0],
        }
    }
}

impl ConvergeCfg {
    pub fn eps_for(&self, n: usize, dim: usize) -> f64 {
        let nf = n as f64;
        if n < 2 {
            // the rule degenerates at n = 1; any positive radius works for
            // the no-crash edge case
            return self.eps_scale;
        }
        self.eps_scale * (nf.ln() / nf).powf(1.0 / dim as f64)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellCfg {
    pub rho_list: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub p: f64,
    pub kernel: KernelCfg,
    pub potential: PotentialCfg,
    pub profile: ProfileCfg,
    pub write_profiles: bool,
    pub seed: u64,
}

impl Default for CellCfg {
    fn default() -> Self {
        let dirs = (0..8)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / 8.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        CellCfg {
            rho_list: vec![0.5, 1.0, 2.0],
            directions: dirs,
            p: 2.0,
            kernel: KernelCfg::default(),
            potential: PotentialCfg::Quartic,
            profile: ProfileCfg::default(),
            write_profiles: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateCfg {
    pub kernel: KernelCfg,
    pub potential: PotentialCfg,
    pub density: DensityCfg,
    pub dim: usize,
    pub samples: usize,
    pub mass_tol: f64,
    pub mass_quadrature: usize,
    pub seed: u64,
}

impl Default for ValidateCfg {
    fn default() -> Self {
        ValidateCfg {
            kernel: KernelCfg::default(),
            potential: PotentialCfg::Quartic,
            density: DensityCfg::default(),
            dim: 2,
            samples: 1000,
            mass_tol: 1e-2,
            mass_quadrature: 200,
            seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = de::<MinimizeCfg>("pee = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("pee"), "{err}");
        let err = de::<SolverCfg>("dt = 0.1\nmax_iter = 10\n").unwrap_err();
        assert!(err.to_string().contains("max_iter"), "{err}");
    }

    #[test]
    fn nested_unknown_keys_are_rejected_too() {
        let text = "[solver]\ndt = 0.1\nwarmup = 3\n";
        let err = de::<MinimizeCfg>(text).unwrap_err();
        assert!(err.to_string().contains("warmup"), "{err}");
    }

    #[test]
    fn defaults_parse_from_an_empty_config() {
        let cfg: MinimizeCfg = de("").unwrap();
        assert_eq!(cfg.p.0, 2.0);
        assert_eq!(cfg.solver.max_iters, 50_000);
        assert!(cfg.fidelity.is_none());
        let seg: SegmentCfg = de("").unwrap();
        assert_eq!(seg.tau_color, 5e-4);
        assert_eq!(seg.lambda, 100.0);
    }

    #[test]
    fn kernel_variants_round_trip() {
        let cfg: GraphCmdCfg = de("[kernel.gaussian]\nbandwidth = 0.5\ncutoff = 3.0\n").unwrap();
        let k = cfg.kernel.build(2).unwrap();
        assert_eq!(k.support_radius(), 1.5);
        let text = canonical(&cfg).unwrap();
        let back: GraphCmdCfg = de(&text).unwrap();
        assert_eq!(back.kernel.build(2).unwrap().support_radius(), 1.5);
    }

    #[test]
    fn eps_rule_and_fixed_eps_are_mutually_exclusive() {
        let g = GraphCfg { eps: Some(0.1), eps_scale: Some(2.0) };
        assert!(g.eps_for(100, 2).is_err());
        let g = GraphCfg { eps: None, eps_scale: Some(2.0) };
        let e = g.eps_for(100, 2).unwrap();
        assert!((e - 2.0 * (100f64.ln() / 100.0).sqrt()).abs() < 1e-15);
        let g = GraphCfg { eps: Some(0.3), eps_scale: None };
        assert_eq!(g.eps_for(100, 2).unwrap(), 0.3);
    }

    #[test]
    fn fidelity_balls_label_contained_points() {
        let cloud = PointCloud::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.05, 0.0],
        ])
        .unwrap();
        let cfg = FidelityCfg {
            balls: vec![BallLabelCfg { center: vec![0.0, 0.0], radius: 0.1, target: -1.0 }],
            indices: vec![1],
            targets: vec![1.0],
            ..FidelityCfg::default()
        };
        let spec = cfg.build(&cloud).unwrap();
        assert_eq!(spec.indices(), &[0, 2, 1]);
        assert_eq!(spec.targets(), &[-1.0, -1.0, 1.0]);

        let empty = FidelityCfg::default();
        assert!(empty.is_empty());
        assert!(empty.build(&cloud).is_err());
    }

    #[test]
    fn converge_eps_rule_handles_the_single_point_case() {
        let cfg = ConvergeCfg::default();
        assert!(cfg.eps_for(1, 2) > 0.0);
        let e = cfg.eps_for(20000, 2);
        assert!((e - 4.0 * (20000f64.ln() / 20000.0).sqrt()).abs() < 1e-15);
    }
}
