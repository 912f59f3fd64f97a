use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::stats::{BoundCheck, Estimate};
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::kernel::{make_kernel, Kernel, KernelSpec};
use crate::sampler::{draw_field_indexed, FieldSample, Route};
use crate::topology::{Connectivity, EventSpec};

/// Minimum sample count for any output that carries a confidence interval.
pub const MIN_CI_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub kernel: KernelSpec,
    #[serde(default = "default_d")]
    pub d: usize,
    /// Cells per side.
    pub n: usize,
    /// Physical torus side.
    pub side: f64,
    /// Torus side in units of the event scale `R`.
    pub side_factor: f64,
    /// Event scale `R`.
    pub scale: f64,
    #[serde(default)]
    pub events: Vec<EventSpec>,
    #[serde(default)]
    pub levels: Vec<f64>,
    pub n_samples: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub route: Route,
    #[serde(default)]
    pub connectivity: Connectivity,
}

fn default_d() -> usize {
    2
}

impl McConfig {
    /// Unit-sigma Bargmann-Fock kernel of width 1 on an `n x n` grid of spacing 1/2.
    pub fn desk(n: usize, n_samples: usize, master_seed: u64) -> Self {
        let side = n as f64 / 2.0;
        Self {
            kernel: KernelSpec::bargmann_fock(1.0).normalized(),
            d: 2,
            n,
            side,
            side_factor: 10.0,
            scale: side / 10.0,
            events: Vec::new(),
            levels: vec![0.0],
            n_samples,
            master_seed,
            route: Route::WhiteNoise,
            connectivity: Connectivity::Four,
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.d, self.n, self.side)
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn make_kernel(&self) -> Result<Kernel> {
        make_kernel(&self.kernel, &self.grid()?)
    }

    pub fn require_ci(&self) -> Result<()> {
        if self.n_samples < MIN_CI_SAMPLES {
            return Err(Error::Domain(format!(
                "{} samples; confidence intervals need at least {MIN_CI_SAMPLES}",
                self.n_samples
            )));
        }
        Ok(())
    }

    /// Same configuration on a torus of a different side at the same spacing.
    pub fn with_side(&self, side: f64) -> Self {
        let h = self.spacing();
        Self { side, n: (side / h).round() as usize, ..self.clone() }
    }
}

/// Summary common to every experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub experiment: String,
    pub estimates: Vec<Estimate>,
    pub checks: Vec<BoundCheck>,
    /// SHA-256 over the per-sample outputs in sample order.
    pub artifacts_digest: String,
    pub config: serde_json::Value,
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl McResult {
    pub fn new(experiment: &str, cfg: &impl Serialize) -> Self {
        Self {
            experiment: experiment.into(),
            estimates: Vec::new(),
            checks: Vec::new(),
            artifacts_digest: String::new(),
            config: serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null),
            wall_clock_secs: 0.0,
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Hex SHA-256 of a sequence of floats.
pub fn digest_f64s<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs `job` on sample `i` for every `i < n_samples`, in parallel, results in sample order.
pub fn map_samples<T, F>(kernel: &Kernel, cfg: &McConfig, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &FieldSample) -> Result<T> + Sync,
{
    (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let f = draw_field_indexed(kernel, cfg.master_seed, i, cfg.route)?;
            job(i, &f)
        })
        .collect()
}

pub(crate) struct Timer(std::time::Instant);

impl Timer {
    pub(crate) fn start() -> Self {
        Self(std::time::Instant::now())
    }

    pub(crate) fn secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
