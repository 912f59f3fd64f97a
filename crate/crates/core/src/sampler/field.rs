use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::noise::{draw_white_noise, sample_seed, WhiteNoiseEps};
use crate::error::{Error, Result};
use crate::fft::{convolve_with_spectrum, to_complex};
use crate::grid::TorusGrid;
use crate::kernel::Kernel;
use crate::rng::{derive_key, tag, GaussianStream};

/// Tolerance on negative spectral mass, relative to `sigma^2`.
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Discrete white noise convolved with the tabulated kernel.
    #[default]
    WhiteNoise,
    /// Exact circulant sampler with covariance `kappa`.
    SpectralOracle,
}

impl std::str::FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "white_noise" => Ok(Route::WhiteNoise),
            "spectral_oracle" => Ok(Route::SpectralOracle),
            other => Err(Error::Domain(format!("unknown route {other:?}"))),
        }
    }
}

/// Field values at the lattice points, shifted by `level_offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
    pub kernel_id: String,
    pub seed: u64,
    /// The `l` in `f_l = f + l`.
    pub level_offset: f64,
}

impl FieldSample {
    /// A deterministic field with no kernel provenance.
    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} values for {} cells", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("field values must be finite".into()));
        }
        Ok(Self { grid, values, kernel_id: String::new(), seed: 0, level_offset: 0.0 })
    }

    /// A field built from a closure of the physical lattice position.
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let h = grid.spacing();
        let values = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                f([c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h])
            })
            .collect();
        Self::from_values(grid, values)
    }

    /// Same values, with `level_offset` raised by `l`.
    pub fn shifted(&self, l: f64) -> Self {
        let mut out = self.clone();
        out.level_offset += l;
        out
    }

    /// Value of `f + level_offset` at cell `i`.
    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i] + self.level_offset
    }

    pub fn effective_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v + self.level_offset).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max((v + self.level_offset).abs()))
    }
}

/// `f(x) = sum_z w_z q(x - z)` by FFT.
pub fn convolve_field(k: &Kernel, w: &WhiteNoiseEps) -> Result<FieldSample> {
    if k.grid != w.grid {
        return Err(Error::GridMismatch { kernel: k.grid.describe(), noise: w.grid.describe() });
    }
    let values = convolve_with_spectrum(k.fft(), &w.coeffs, k.spectrum());
    Ok(FieldSample { grid: k.grid, values, kernel_id: k.id().to_string(), seed: w.seed, level_offset: 0.0 })
}

pub fn draw_field(k: &Kernel, seed: u64, route: Route) -> Result<FieldSample> {
    match route {
        Route::WhiteNoise => convolve_field(k, &draw_white_noise(&k.grid, seed)),
        Route::SpectralOracle => spectral_field(k, seed),
    }
}

/// Field for sample `index` of a Monte Carlo run.
pub fn draw_field_indexed(k: &Kernel, master_seed: u64, index: u64, route: Route) -> Result<FieldSample> {
    draw_field(k, sample_seed(master_seed, index), route)
}

fn spectral_field(k: &Kernel, seed: u64) -> Result<FieldSample> {
    let lambda = k.kappa_spectrum();
    let tolerance = SPECTRAL_TOLERANCE * k.sigma * k.sigma;
    let worst = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    if worst < -tolerance {
        return Err(Error::NegativeSpectralMass { value: worst, tolerance });
    }
    let mut z = vec![0.0; k.grid.len()];
    GaussianStream::new(derive_key(seed, tag::SPECTRAL), 0).fill_normals(&mut z, 1.0);
    let mut buf = to_complex(&z);
    k.fft().forward(&mut buf);
    for (x, l) in buf.iter_mut().zip(lambda.iter()) {
        *x *= Complex64::new(l.max(0.0).sqrt(), 0.0);
    }
    k.fft().inverse(&mut buf);
    let values = buf.into_iter().map(|c| c.re).collect();
    Ok(FieldSample { grid: k.grid, values, kernel_id: k.id().to_string(), seed, level_offset: 0.0 })
}

/// `O(N^2)` circular convolution, kept for small-grid cross-checks.
pub fn direct_convolution(grid: &TorusGrid, q: &[f64], w: &[f64]) -> Vec<f64> {
    (0..grid.len())
        .map(|x| {
            let cx = grid.coords(x);
            (0..grid.len())
                .map(|z| {
                    let cz = grid.coords(z);
                    let mut diff = [0usize; 3];
                    for a in 0..grid.d() {
                        diff[a] = (cx[a] + grid.n() - cz[a]) % grid.n();
                    }
                    w[z] * q[grid.index(&diff[..grid.d()])]
                })
                .sum()
        })
        .collect()
}
