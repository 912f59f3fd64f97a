use serde::{Deserialize, Serialize};

use super::mc::{digest_f64s, map_samples, McConfig, McResult, Timer};
use super::stats::{Estimate, SE_MULTIPLIER};
use crate::error::{Error, Result};
use crate::topology::{EventSpec, ThresholdEngine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    /// Event scale `R` (crossings) or inner radius `r` (circuits).
    pub r: f64,
    /// Annulus ratio `L`; 1 for crossings.
    pub l: f64,
    pub level: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub rows: Vec<CurveRow>,
    pub summary: McResult,
}

impl Curve {
    /// Rows at one level, in input order.
    pub fn at_level(&self, level: f64) -> Vec<&CurveRow> {
        self.rows.iter().filter(|r| r.level == level).collect()
    }

    /// Rows at one level and one `r`, in input order.
    pub fn at(&self, level: f64, r: f64) -> Vec<&CurveRow> {
        self.rows.iter().filter(|row| row.level == level && row.r == r).collect()
    }
}

/// Successive estimates never drop by more than three combined SEs.
pub fn increasing_within_se(rows: &[&CurveRow]) -> bool {
    rows.windows(2).all(|w| {
        let (a, b) = (&w[0].estimate, &w[1].estimate);
        b.value >= a.value - SE_MULTIPLIER * a.se.hypot(b.se)
    })
}

/// Successive estimates never rise by more than three combined SEs.
pub fn decreasing_within_se(rows: &[&CurveRow]) -> bool {
    rows.windows(2).all(|w| {
        let (a, b) = (&w[0].estimate, &w[1].estimate);
        b.value <= a.value + SE_MULTIPLIER * a.se.hypot(b.se)
    })
}

/// One threshold per sample and event; event probabilities at each level follow from `level > t`.
fn level_table(cfg: &McConfig, name: &str, events: &[(f64, f64, EventSpec)], levels: &[f64]) -> Result<Curve> {
    cfg.require_ci()?;
    if levels.is_empty() {
        return Err(Error::Domain("no levels given".into()));
    }
    let timer = Timer::start();
    let kernel = cfg.make_kernel()?;
    let engines =
        events.iter().map(|(_, _, e)| ThresholdEngine::new(&kernel.grid, e, cfg.connectivity)).collect::<Result<Vec<_>>>()?;
    let t: Vec<Vec<f64>> =
        map_samples(&kernel, cfg, |_, f| engines.iter().map(|eng| Ok(eng.sweep(f)?.t_value)).collect())?;
    let mut rows = Vec::new();
    for &level in levels {
        for (j, &(r, l, _)) in events.iter().enumerate() {
            let held: Vec<bool> = t.iter().map(|ts| level > ts[j]).collect();
            let estimate = Estimate::proportion(format!("p[{}; r={r}, l={l}, level={level}]", events[j].2.label()), &held);
            rows.push(CurveRow { r, l, level, estimate });
        }
    }
    let mut summary = McResult::new(name, cfg);
    summary.estimates = rows.iter().map(|r| r.estimate.clone()).collect();
    summary.artifacts_digest = digest_f64s(t.iter().flatten());
    summary.wall_clock_secs = timer.secs();
    Ok(Curve { rows, summary })
}

/// `P_l[Cross_R]` over scales and levels.
pub fn crossing_curve(cfg: &McConfig, r_list: &[f64], levels: &[f64]) -> Result<Curve> {
    let r_max = r_list.iter().cloned().fold(0.0, f64::max);
    if cfg.side < cfg.side_factor * r_max - 1e-9 {
        return Err(Error::GeometryOutOfBounds(format!(
            "side {} below side factor {} times R = {r_max}",
            cfg.side, cfg.side_factor
        )));
    }
    let events: Vec<_> = r_list.iter().map(|&r| (r, 1.0, EventSpec::cross(r))).collect();
    level_table(cfg, "crossing-curve", &events, levels)
}

/// `P_l[Circ(r, L r)]` over inner radii, ratios and levels.
pub fn circuit_scan(cfg: &McConfig, r_list: &[f64], l_list: &[f64], levels: &[f64]) -> Result<Curve> {
    let mut events = Vec::new();
    for &r in r_list {
        for &l in l_list {
            if !(l > 1.0) {
                return Err(Error::DegenerateAnnulus(l));
            }
            if 2.0 * l * r >= cfg.side {
                return Err(Error::GeometryOutOfBounds(format!("outer radius {} reaches half the side {}", l * r, cfg.side)));
            }
            events.push((r, l, EventSpec::circuit(r, l * r)));
        }
    }
    level_table(cfg, "circuit-scan", &events, levels)
}
