use serde::{Deserialize, Serialize};

use super::mc::{digest_f64s, map_samples, McConfig, McResult, Timer};
use super::stats::{covariance_of_indicators, BoundCheck, Estimate};
use crate::error::{Error, Result};
use crate::kernel::{validate_conditions, Tolerances};
use crate::topology::{EventSpec, ThresholdEngine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkgResult {
    pub p_a: Estimate,
    pub p_b: Estimate,
    pub p_ab: Estimate,
    /// `P[A and B] - P[A] P[B]` with delta-method SE.
    pub covariance: Estimate,
    pub check: BoundCheck,
    pub summary: McResult,
}

/// Positive association of two increasing events at one level.
pub fn fkg_test(cfg: &McConfig, a: &EventSpec, b: &EventSpec, level: f64) -> Result<FkgResult> {
    cfg.require_ci()?;
    for e in [a, b] {
        if !e.is_increasing() {
            return Err(Error::NonIncreasingEvent(e.label()));
        }
    }
    let timer = Timer::start();
    let kernel = cfg.make_kernel()?;
    let report = validate_conditions(&kernel, &Tolerances::default());
    if !report.weak_positivity.pass {
        return Err(Error::Domain(format!(
            "kernel covariance takes the negative value {}; positive association needs kappa >= 0",
            report.weak_positivity.min_kappa
        )));
    }
    let ea = ThresholdEngine::new(&kernel.grid, a, cfg.connectivity)?;
    let eb = ThresholdEngine::new(&kernel.grid, b, cfg.connectivity)?;
    let t: Vec<[f64; 2]> = map_samples(&kernel, cfg, |_, f| Ok([ea.sweep(f)?.t_value, eb.sweep(f)?.t_value]))?;
    let ha: Vec<bool> = t.iter().map(|x| level > x[0]).collect();
    let hb: Vec<bool> = t.iter().map(|x| level > x[1]).collect();
    let hab: Vec<bool> = ha.iter().zip(&hb).map(|(&x, &y)| x && y).collect();
    let (cov, se) = covariance_of_indicators(&ha, &hb);
    let covariance = Estimate::new("cov[a,b]", cov, se, t.len());
    let check = BoundCheck::new("0 <= p[ab] - p[a]p[b]", 0.0, cov, se);
    let mut summary = McResult::new("fkg", cfg);
    summary.estimates = vec![
        Estimate::proportion("p[a]", &ha),
        Estimate::proportion("p[b]", &hb),
        Estimate::proportion("p[ab]", &hab),
        covariance.clone(),
    ];
    summary.checks.push(check.clone());
    summary.artifacts_digest = digest_f64s(t.iter().flatten());
    summary.wall_clock_secs = timer.secs();
    Ok(FkgResult {
        p_a: summary.estimates[0].clone(),
        p_b: summary.estimates[1].clone(),
        p_ab: summary.estimates[2].clone(),
        covariance,
        check,
        summary,
    })
}
