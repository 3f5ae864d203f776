//! Graph Ginzburg-Landau energies on point clouds, their gradient-flow
//! minimization, optimal-transport metrics between labeled clouds, and the
//! sharp-interface objects they converge to.
//!
//! The building blocks live in small modules: [`kernel`] and [`potential`]
//! define the ingredients of the energy, [`cloud`] and [`density`] handle
//! sampled geometry, [`graph`] assembles weighted neighborhood graphs,
//! [`energy`] and [`solver`] evaluate and minimize the functional, and
//! [`transport`] and [`continuum`] provide the metric and limit machinery.

pub mod cloud;
pub mod continuum;
pub mod density;
pub mod energy;
pub mod error;
pub mod graph;
pub mod image;
pub mod kernel;
pub mod potential;
pub mod solver;
pub mod transport;
pub mod util;
pub mod validate;

pub use cloud::{LabelField, PointCloud};
pub use continuum::{
    cell_sigma, f_eps_energy, g_infinity_energy, hard_interface_consistency, marginal_kernel,
    ConsistencyRun, Face, GridField, MarginalKernel, PolyhedralInterface, Profile1D,
    ProfileOptions, SigmaResult,
};
pub use density::{BoxDomain, Density, MaskGrid};
pub use energy::{
    fidelity_energy, gl_energy, gl_energy_full, gl_gradient, gl_gradient_into,
    gl_infinity_energy, gl_tilde_energy, segmentation_objective, EnergyBreakdown, EnergyReport,
    FidelitySpec,
};
pub use error::{Error, Result};
pub use graph::{build_graph, connectivity_report, ConnectivityReport, SparseGraph};
pub use image::{build_pixel_graph, ImageGrid};
pub use kernel::{ConvexBody, Kernel, KernelShape};
pub use potential::{Potential, PotentialForm};
pub use solver::{
    minimize, phase_purity, threshold, InitScheme, SolveOptions, SolveResult,
};
pub use transport::{
    ot_distance_inf, ot_distance_p, rate_diagnostic, tlp_distance, transport_map_to_samples,
    CellMap, RateRow, TransportPlan, WeightedPointSet,
};
pub use validate::{
    validate_assumptions, AssumptionCheck, AssumptionReport, CheckStatus, ValidateOptions,
};
