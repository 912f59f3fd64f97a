use crate::grid::TorusGrid;
use crate::rng::{derive_key, tag, GaussianStream};

/// Discrete white noise: one `N(0, cell_volume)` coefficient per lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteNoiseEps {
    pub grid: TorusGrid,
    pub coeffs: Vec<f64>,
    pub seed: u64,
}

impl WhiteNoiseEps {
    /// Noise with explicit coefficients, used to inject deltas in tests.
    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<f64>, seed: u64) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count must match the grid");
        Self { grid, coeffs, seed }
    }
}

/// Seed of sample `index` under a master seed.
pub fn sample_seed(master_seed: u64, index: u64) -> u64 {
    derive_key(master_seed, index.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x5341_4d50_4c45)
}

pub fn draw_white_noise(grid: &TorusGrid, seed: u64) -> WhiteNoiseEps {
    let mut coeffs = vec![0.0; grid.len()];
    let mut stream = GaussianStream::new(derive_key(seed, tag::WHITE_NOISE), 0);
    stream.fill_normals(&mut coeffs, grid.cell_volume().sqrt());
    WhiteNoiseEps { grid: *grid, coeffs, seed }
}
