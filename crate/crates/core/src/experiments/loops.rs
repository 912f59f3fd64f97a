use serde::{Deserialize, Serialize};

use super::mc::{digest_f64s, map_samples, McConfig, McResult, Timer};
use super::stats::{jackknife_variance_se, sample_variance, BoundCheck, Estimate};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::topology::{EventSpec, ThresholdEngine};

fn loop_thresholds(kernel: &Kernel, cfg: &McConfig) -> Result<Vec<f64>> {
    let engine = ThresholdEngine::new(&kernel.grid, &EventSpec::loop_event(0), cfg.connectivity)?;
    map_samples(kernel, cfg, |_, f| Ok(engine.sweep(f)?.t_value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarterBound {
    pub p_le: Estimate,
    pub p_ge: Estimate,
    pub le_check: BoundCheck,
    /// Only asserted in dimension two.
    pub ge_check: Option<BoundCheck>,
    pub sum: f64,
    pub sum_se: f64,
    pub summary: McResult,
}

/// `P[T <= 0] >= 1/4`, and `P[T >= 0] >= 1/4` when `d = 2`, for the loop threshold.
pub fn quarter_bound_test(cfg: &McConfig) -> Result<QuarterBound> {
    cfg.require_ci()?;
    if !(2..=3).contains(&cfg.d) {
        return Err(Error::UnsupportedDimension(cfg.d));
    }
    let timer = Timer::start();
    let kernel = cfg.make_kernel()?;
    let t = loop_thresholds(&kernel, cfg)?;
    let le: Vec<bool> = t.iter().map(|&x| x <= 0.0).collect();
    let ge: Vec<bool> = t.iter().map(|&x| x >= 0.0).collect();
    let p_le = Estimate::proportion("p[t<=0]", &le);
    let p_ge = Estimate::proportion("p[t>=0]", &ge);
    let le_check = BoundCheck::new("1/4 <= p[t<=0]", 0.25, p_le.value, p_le.se);
    let ge_check = (cfg.d == 2).then(|| BoundCheck::new("1/4 <= p[t>=0]", 0.25, p_ge.value, p_ge.se));
    let mut summary = McResult::new("quarter-bound", cfg);
    summary.estimates = vec![p_le.clone(), p_ge.clone()];
    summary.checks.push(le_check.clone());
    summary.checks.extend(ge_check.clone());
    summary.artifacts_digest = digest_f64s(&t);
    summary.wall_clock_secs = timer.secs();
    Ok(QuarterBound {
        sum: p_le.value + p_ge.value,
        sum_se: p_le.se.hypot(p_ge.se),
        p_le,
        p_ge,
        le_check,
        ge_check,
        summary,
    })
}

/// `P[X >= l] <= 4 a^2 / l^2` given `Var X = a^2` and `P[X <= 0] = t^2`; `None` unless `l > 2a/t`.
pub fn chebyshev_bound(a2: f64, t2: f64, ell: f64) -> Option<f64> {
    if !(a2 >= 0.0 && t2 > 0.0 && t2 <= 1.0) {
        return None;
    }
    let threshold = 2.0 * (a2 / t2).sqrt();
    (ell > threshold).then(|| 4.0 * a2 / (ell * ell))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub eps: f64,
    /// `sigma * eps`.
    pub level: f64,
    pub p_upper: Estimate,
    pub p_lower: Estimate,
    /// `4 Var(T) / (sigma eps)^2`.
    pub bound: f64,
    pub bound_se: f64,
    pub upper_check: BoundCheck,
    pub lower_check: BoundCheck,
    /// Whether `sigma eps` exceeds `2a/t` for the upper and lower tails.
    pub applicable_upper: bool,
    pub applicable_lower: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTest {
    pub variance: Estimate,
    pub rows: Vec<TailRow>,
    pub summary: McResult,
}

/// Tails of the loop threshold against the Chebyshev shape with measured variance.
pub fn concentration_tail_test(cfg: &McConfig, eps_list: &[f64]) -> Result<TailTest> {
    cfg.require_ci()?;
    if eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::Domain("tail epsilons must be positive".into()));
    }
    let timer = Timer::start();
    let kernel = cfg.make_kernel()?;
    let t = loop_thresholds(&kernel, cfg)?;
    let var = sample_variance(&t);
    let var_se = jackknife_variance_se(&t);
    let variance = Estimate::new("var_t", var, var_se, t.len());
    let p0_le = t.iter().filter(|&&x| x <= 0.0).count() as f64 / t.len() as f64;
    let p0_ge = t.iter().filter(|&&x| x >= 0.0).count() as f64 / t.len() as f64;
    let mut summary = McResult::new("tails", cfg);
    summary.estimates.push(variance.clone());
    let rows: Vec<TailRow> = eps_list
        .iter()
        .map(|&eps| {
            let level = kernel.sigma * eps;
            let up: Vec<bool> = t.iter().map(|&x| x >= level).collect();
            let lo: Vec<bool> = t.iter().map(|&x| x <= -level).collect();
            let p_upper = Estimate::proportion(format!("p[t>={eps}sigma]"), &up);
            let p_lower = Estimate::proportion(format!("p[t<=-{eps}sigma]"), &lo);
            let bound = 4.0 * var / (level * level);
            let bound_se = 4.0 * var_se / (level * level);
            let upper_check =
                BoundCheck::new(format!("p[t>={eps}sigma] <= 4var/l^2"), p_upper.value, bound, p_upper.se.hypot(bound_se));
            let lower_check =
                BoundCheck::new(format!("p[t<=-{eps}sigma] <= 4var/l^2"), p_lower.value, bound, p_lower.se.hypot(bound_se));
            TailRow {
                eps,
                level,
                applicable_upper: chebyshev_bound(var, p0_le, level).is_some(),
                applicable_lower: chebyshev_bound(var, p0_ge, level).is_some(),
                p_upper,
                p_lower,
                bound,
                bound_se,
                upper_check,
                lower_check,
            }
        })
        .collect();
    for r in &rows {
        summary.estimates.extend([r.p_upper.clone(), r.p_lower.clone()]);
        summary.checks.extend([r.upper_check.clone(), r.lower_check.clone()]);
    }
    summary.artifacts_digest = digest_f64s(&t);
    summary.wall_clock_secs = timer.secs();
    Ok(TailTest { variance, rows, summary })
}
