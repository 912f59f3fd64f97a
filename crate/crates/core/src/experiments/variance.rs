use serde::{Deserialize, Serialize};

use super::mc::{digest_f64s, map_samples, McConfig, McResult, Timer};
use super::stats::{jackknife_variance_se, sample_variance, Estimate, SE_MULTIPLIER};
use crate::error::{Error, Result};
use crate::kernel::alpha;
use crate::topology::{EventSpec, ThresholdEngine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub side: f64,
    pub n: usize,
    pub volume: f64,
    pub variance: Estimate,
    pub mean_threshold: Estimate,
    pub alpha_sq: f64,
    /// `1 + |ln(sigma sqrt|T| / |q|_1)|`.
    pub log_factor: f64,
    pub product: f64,
    pub product_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceScan {
    pub rows: Vec<VarianceRow>,
    /// Each product is at most the previous plus three combined SEs; `None` for one row.
    pub product_nonincreasing: Option<bool>,
    /// Each variance is below the previous by more than three combined SEs.
    pub variance_decreasing: Option<bool>,
    pub summary: McResult,
}

/// Variance of the loop threshold on growing tori at fixed spacing.
pub fn variance_scan(cfg: &McConfig, sides: &[f64]) -> Result<VarianceScan> {
    cfg.require_ci()?;
    if sides.is_empty() {
        return Err(Error::Domain("variance scan needs at least one side".into()));
    }
    let timer = Timer::start();
    let mut summary = McResult::new("variance-scan", cfg);
    let mut rows = Vec::with_capacity(sides.len());
    let mut all = Vec::new();
    for &side in sides {
        let c = cfg.with_side(side);
        let kernel = c.make_kernel()?;
        let engine = ThresholdEngine::new(&kernel.grid, &EventSpec::loop_event(0), c.connectivity)?;
        let t: Vec<f64> = map_samples(&kernel, &c, |_, f| Ok(engine.sweep(f)?.t_value))?;
        let var = sample_variance(&t);
        let var_se = jackknife_variance_se(&t);
        let volume = kernel.grid.volume();
        let log_factor = 1.0 + (kernel.sigma * volume.sqrt() / kernel.l1_norm).ln().abs();
        let a = alpha(&kernel)?;
        let variance = Estimate::new(format!("var_t[side={side}]"), var, var_se, t.len());
        summary.estimates.push(variance.clone());
        rows.push(VarianceRow {
            side,
            n: c.n,
            volume,
            variance,
            mean_threshold: Estimate::mean(format!("mean_t[side={side}]"), &t),
            alpha_sq: a * a,
            log_factor,
            product: var * log_factor,
            product_se: var_se * log_factor,
        });
        all.extend(t);
    }
    let pairs = || rows.windows(2).map(|w| (&w[0], &w[1]));
    let (product_nonincreasing, variance_decreasing) = if rows.len() < 2 {
        (None, None)
    } else {
        let inc = pairs().all(|(a, b)| b.product <= a.product + SE_MULTIPLIER * a.product_se.hypot(b.product_se));
        let dec = pairs().all(|(a, b)| {
            b.variance.value < a.variance.value - SE_MULTIPLIER * a.variance.se.hypot(b.variance.se)
        });
        (Some(inc), Some(dec))
    };
    summary.artifacts_digest = digest_f64s(&all);
    summary.wall_clock_secs = timer.secs();
    Ok(VarianceScan { rows, product_nonincreasing, variance_decreasing, summary })
}
