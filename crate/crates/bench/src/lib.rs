//! Shared fixtures for the benchmark targets: seeded inputs sized so a
//! single measurement stays in the millisecond range.

use pgl_core::{build_graph, Kernel, KernelShape, LabelField, PointCloud, SparseGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn unit_cloud(n: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
    PointCloud::from_rows(&rows).unwrap()
}

pub fn ball_kernel(dim: usize) -> Kernel {
    Kernel::new(KernelShape::BallIndicator { radius: 1.0 }, dim).unwrap()
}

pub fn ball_graph(cloud: &PointCloud, eps: f64) -> SparseGraph {
    build_graph(cloud, &ball_kernel(cloud.dim()), eps).unwrap()
}

/// A smooth two-phase field over the first coordinate, the typical state
/// mid-flow.
pub fn tanh_field(cloud: &PointCloud) -> LabelField {
    LabelField::new(
        (0..cloud.len()).map(|i| ((cloud.point(i)[0] - 0.5) / 0.1).tanh()).collect(),
    )
}
