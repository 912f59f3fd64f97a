use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mc::{McConfig, McResult, Timer};
use super::stats::{BoundCheck, Estimate};
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::sampler::{draw_field_indexed, FieldSample};
use crate::topology::events::{holds_on_region, open_components, Goal};
use crate::topology::{Connectivity, Region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "value", rename_all = "snake_case")]
pub enum Variant {
    Phi(u64),
    Psi(u64),
}

/// `phi_N(p) = 1 - (1-p)^(1/N)` and `psi_L(p) = 1 - (1-p)^(1/(16 L^2))`.
pub fn phi_psi(p: f64, variant: Variant) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    let root = match variant {
        Variant::Phi(n) if n >= 1 => n as f64,
        Variant::Psi(l) if l >= 1 => 16.0 * (l * l) as f64,
        _ => return Err(Error::Domain(format!("{variant:?} needs a parameter >= 1"))),
    };
    Ok(1.0 - (1.0 - p).powf(1.0 / root))
}

/// Deliberate corruption used to exercise the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditFault {
    /// Every concluded crossing is reported as absent.
    DropConclusions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditParams {
    /// Level for the loop-to-cross inclusion.
    pub loop_level: f64,
    /// Level for the gluing inclusion.
    pub glue_level: f64,
    /// Annulus ratio `L` of the gluing construction.
    pub glue_l: usize,
    #[serde(default)]
    pub fault: Option<AuditFault>,
}

impl Default for AuditParams {
    fn default() -> Self {
        Self { loop_level: 0.0, glue_level: 0.0, glue_l: 2, fault: None }
    }
}

/// Lattice layout of both inclusions on one grid.
///
/// Loop to cross: the loop scale is `m = n / side_factor` cells and the daggers are
/// `(3m+1) x (4m+1)` sites anchored on the `m`-lattice in two orientations.
/// Gluing: scale `g = (n-1) / (6L)` cells, so the `(6Lg+1)`-wide rectangle never meets itself.
#[derive(Debug, Clone)]
pub struct AuditGeometry {
    pub side_factor: usize,
    pub loop_cells: usize,
    pub glue_cells: usize,
    pub glue_l: usize,
    torus: Region,
    daggers: Vec<Region>,
    cross_lr: Region,
    left: Region,
    right: Region,
    /// Annulus centred on the shared side at height `j g`, for each `j < 4L`.
    circuits: Vec<Region>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleAudit {
    pub loop_held: bool,
    pub dagger_at_origin: bool,
    pub loop_violation: bool,
    /// Premise holds for some `j2` whose annulus lies inside the long rectangle.
    pub glue_premise: bool,
    /// Premise holds only for `j2` whose annulus leaves the long rectangle.
    pub glue_premise_edge: bool,
    pub cross_lr: bool,
    pub dagger_lr: bool,
    pub circuit: bool,
    pub glue_violation: bool,
    pub edge_exception: bool,
}

impl AuditGeometry {
    pub fn new(grid: &TorusGrid, side_factor: usize, glue_l: usize, conn: Connectivity) -> Result<Self> {
        if grid.d() != 2 {
            return Err(Error::UnsupportedDimension(grid.d()));
        }
        if side_factor < 4 || grid.n() % side_factor != 0 {
            return Err(Error::Domain(format!(
                "side factor {side_factor} must be at least 4 and divide n = {}",
                grid.n()
            )));
        }
        if glue_l < 2 {
            return Err(Error::DegenerateAnnulus(glue_l as f64));
        }
        if conn != Connectivity::Four {
            // diagonal steps let a path cross a circuit without sharing a site
            return Err(Error::Domain("the gluing inclusion needs 4-connectivity".into()));
        }
        let n = grid.n();
        let m = n / side_factor;
        let g = (n - 1) / (6 * glue_l);
        if g == 0 {
            return Err(Error::GeometryOutOfBounds(format!("n = {n} too small for gluing with L = {glue_l}")));
        }
        let torus = Region::torus(grid, conn, Goal::Winding { axis: 0 });
        let mut daggers = Vec::with_capacity(2 * side_factor * side_factor);
        for rot in 0..2u8 {
            for ty in 0..side_factor {
                for tx in 0..side_factor {
                    let anchor = ((tx * m) as i64, (ty * m) as i64);
                    daggers.push(Region::rect_sites(grid, anchor, rot, 3 * m + 1, 4 * m + 1, conn)?);
                }
            }
        }
        let lg = glue_l * g;
        let cross_lr = Region::rect_sites(grid, (0, 0), 0, 6 * lg + 1, 4 * lg + 1, conn)?;
        let left = Region::rect_sites(grid, (0, 0), 0, 3 * lg + 1, 4 * lg + 1, conn)?;
        let right = Region::rect_sites(grid, (3 * lg as i64, 0), 0, 3 * lg + 1, 4 * lg + 1, conn)?;
        let circuits = (0..4 * glue_l)
            .map(|j| Region::annulus_sites(grid, (3 * lg as i64, (j * g) as i64), g as f64, lg as f64, conn))
            .collect();
        Ok(Self { side_factor, loop_cells: m, glue_cells: g, glue_l, torus, daggers, cross_lr, left, right, circuits })
    }

    pub fn placements(&self) -> usize {
        self.daggers.len()
    }

    /// Component labels on the terminal column `col` for each row block `I_j`.
    fn block_labels(&self, labels: &[usize], region: &Region, col: i64) -> Vec<Vec<usize>> {
        let g = self.glue_cells as i64;
        (0..4 * self.glue_l as i64)
            .map(|j| {
                let mut v: Vec<usize> = (j * g..=(j + 1) * g)
                    .map(|b| labels[(col + b * region.width as i64) as usize])
                    .filter(|&l| l != usize::MAX)
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect()
    }

    pub fn check(&self, f: &FieldSample, params: &AuditParams) -> SampleAudit {
        let drop = params.fault.is_some();
        let mut out = SampleAudit::default();

        let lvl = params.loop_level;
        out.loop_held = holds_on_region(f, lvl, &self.torus);
        out.dagger_at_origin = holds_on_region(f, lvl, &self.daggers[0]);
        if out.loop_held {
            let crossed = !drop && self.daggers.iter().any(|r| holds_on_region(f, lvl, r));
            out.loop_violation = !crossed;
        }

        let lvl = params.glue_level;
        let (l, lg) = (self.glue_l, self.glue_l * self.glue_cells);
        let left = open_components(f, lvl, &self.left);
        let right = open_components(f, lvl, &self.right);
        let left_in = self.block_labels(&left, &self.left, 0);
        let left_out = self.block_labels(&left, &self.left, 3 * lg as i64);
        let right_in = self.block_labels(&right, &self.right, 0);
        let right_out = self.block_labels(&right, &self.right, 3 * lg as i64);
        let meets = |a: &[usize], b: &[usize]| a.iter().any(|x| b.binary_search(x).is_ok());
        out.dagger_lr = left_in.iter().any(|a| left_out.iter().any(|b| meets(a, b)));
        out.circuit = holds_on_region(f, lvl, &self.circuits[2 * l]);
        for j2 in 0..4 * l {
            let paired = (0..4 * l).any(|j1| meets(&left_in[j1], &left_out[j2]) && meets(&right_in[j2], &right_out[j1]));
            if paired && holds_on_region(f, lvl, &self.circuits[j2]) {
                if (l..=3 * l).contains(&j2) {
                    out.glue_premise = true;
                } else {
                    out.glue_premise_edge = true;
                }
            }
        }
        out.cross_lr = !drop && holds_on_region(f, lvl, &self.cross_lr);
        out.glue_violation = out.glue_premise && !out.cross_lr;
        out.edge_exception = out.glue_premise_edge && !out.glue_premise && !out.cross_lr;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditResult {
    pub n_samples: usize,
    pub placements: usize,
    pub loop_cells: usize,
    pub glue_cells: usize,
    pub glue_l: usize,
    pub loop_samples: usize,
    pub loop_to_cross_violations: usize,
    pub glue_samples: usize,
    pub gluing_violations: usize,
    /// Samples whose premise holds only with an annulus leaving the long rectangle, yet no long crossing.
    pub edge_exceptions: usize,
    pub edge_samples: usize,
    pub p_loop: Estimate,
    pub p_dagger: Estimate,
    pub phi_prediction: f64,
    pub phi_check: BoundCheck,
    pub p_cross_lr: Estimate,
    pub p_dagger_lr: Estimate,
    pub p_circuit: Estimate,
    pub p_glue: Estimate,
    pub psi_prediction: f64,
    pub psi_check: BoundCheck,
    pub summary: McResult,
}

impl AuditResult {
    pub fn violations(&self) -> usize {
        self.loop_to_cross_violations + self.gluing_violations
    }
}

/// Per-sample audit of the loop-to-cross and gluing inclusions.
pub fn implication_audit(cfg: &McConfig, params: &AuditParams) -> Result<AuditResult> {
    cfg.require_ci()?;
    let timer = Timer::start();
    let sf = cfg.side_factor.round();
    if (sf - cfg.side_factor).abs() > 1e-9 || sf < 4.0 {
        return Err(Error::Domain(format!("side factor {} must be an integer >= 4", cfg.side_factor)));
    }
    let kernel = cfg.make_kernel()?;
    let geo = AuditGeometry::new(&kernel.grid, sf as usize, params.glue_l, cfg.connectivity)?;
    let rows: Vec<SampleAudit> = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|i| Ok(geo.check(&draw_field_indexed(&kernel, cfg.master_seed, i, cfg.route)?, params)))
        .collect::<Result<_>>()?;

    let col = |p: fn(&SampleAudit) -> bool| rows.iter().map(p).collect::<Vec<bool>>();
    let count = |p: fn(&SampleAudit) -> bool| rows.iter().filter(|r| p(r)).count();
    let p_loop = Estimate::proportion("p[loop]", &col(|r| r.loop_held));
    let p_dagger = Estimate::proportion("p[dagger]", &col(|r| r.dagger_at_origin));
    let p_cross_lr = Estimate::proportion("p[cross_lr]", &col(|r| r.cross_lr));
    let p_dagger_lr = Estimate::proportion("p[dagger_lr]", &col(|r| r.dagger_lr));
    let p_circuit = Estimate::proportion("p[circuit]", &col(|r| r.circuit));
    let p_glue = Estimate::proportion("p[glue premise]", &col(|r| r.glue_premise));

    let phi_prediction = phi_psi(p_loop.value, Variant::Phi(geo.placements() as u64))?;
    let phi_check = BoundCheck::new("phi_n(p[loop]) <= p[dagger]", phi_prediction, p_dagger.value, p_dagger.se);
    let psi = phi_psi(p_dagger_lr.value, Variant::Psi(params.glue_l as u64))?;
    let psi_prediction = psi * psi * p_circuit.value;
    let psi_check = BoundCheck::new(
        "psi_l(p[dagger_lr])^2 p[circuit] <= p[cross_lr]",
        psi_prediction,
        p_cross_lr.value,
        p_cross_lr.se.hypot(p_circuit.se),
    );

    let mut summary = McResult::new("audit", &(cfg, params));
    summary.estimates =
        vec![p_loop.clone(), p_dagger.clone(), p_cross_lr.clone(), p_dagger_lr.clone(), p_circuit.clone(), p_glue.clone()];
    summary.checks = vec![phi_check.clone(), psi_check.clone()];
    let mut h = Sha256::new();
    for r in &rows {
        let bits = [
            r.loop_held,
            r.dagger_at_origin,
            r.loop_violation,
            r.glue_premise,
            r.glue_premise_edge,
            r.cross_lr,
            r.dagger_lr,
            r.circuit,
            r.glue_violation,
            r.edge_exception,
        ];
        h.update(bits.map(u8::from));
    }
    summary.artifacts_digest = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    summary.wall_clock_secs = timer.secs();
    Ok(AuditResult {
        n_samples: rows.len(),
        placements: geo.placements(),
        loop_cells: geo.loop_cells,
        glue_cells: geo.glue_cells,
        glue_l: geo.glue_l,
        loop_samples: count(|r| r.loop_held),
        loop_to_cross_violations: count(|r| r.loop_violation),
        glue_samples: count(|r| r.glue_premise),
        gluing_violations: count(|r| r.glue_violation),
        edge_exceptions: count(|r| r.edge_exception),
        edge_samples: count(|r| r.glue_premise_edge),
        p_loop,
        p_dagger,
        phi_prediction,
        phi_check,
        p_cross_lr,
        p_dagger_lr,
        p_circuit,
        p_glue,
        psi_prediction,
        psi_check,
        summary,
    })
}
