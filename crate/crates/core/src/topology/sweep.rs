use serde::{Deserialize, Serialize};

use super::events::{Connectivity, EventKind, EventSpec, Goal, Percolator, Region};
use super::union_find::Class;
use crate::error::{Error, Result};
use crate::sampler::FieldSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Realization {
    /// Homology class (loops) or angular winding in the first slot (circuits).
    Winding { class: Class },
    Crossing,
    /// The event fails even with every site open.
    Never,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Infimum of the levels `l` at which `f + l` realizes the event; `+inf` if never.
    pub t_value: f64,
    /// Grid coordinates of the site whose opening realizes the event.
    pub saddle_cell: Vec<usize>,
    pub saddle_index: usize,
    pub realizing_class: Realization,
    /// Field value (after `level_offset`) at which the event appears; equals `-t_value`.
    pub merge_level: f64,
    pub sweep_order_digest: u64,
}

/// A region prepared once and swept for many samples on the same grid.
#[derive(Debug, Clone)]
pub struct ThresholdEngine {
    region: Region,
    event: EventSpec,
}

impl ThresholdEngine {
    pub fn new(grid: &crate::grid::TorusGrid, e: &EventSpec, conn: Connectivity) -> Result<Self> {
        if e.complement {
            return Err(Error::NonIncreasingEvent(e.label()));
        }
        Ok(Self { region: Region::build(grid, e, conn)?, event: *e })
    }

    pub fn event(&self) -> &EventSpec {
        &self.event
    }

    pub fn sweep(&self, f: &FieldSample) -> Result<ThresholdResult> {
        if f.grid != self.region.grid {
            return Err(Error::GridMismatch { kernel: self.region.grid.describe(), noise: f.grid.describe() });
        }
        let region = &self.region;
        let mut order: Vec<u32> = (0..region.len() as u32).collect();
        // descending raw value, then ascending torus cell, then local site
        order.sort_unstable_by(|&a, &b| {
            let (ca, cb) = (region.cells[a as usize], region.cells[b as usize]);
            f.values[cb].total_cmp(&f.values[ca]).then(ca.cmp(&cb)).then(a.cmp(&b))
        });
        let mut perc = Percolator::new(region);
        let mut digest = 0xcbf2_9ce4_8422_2325u64;
        for &s in &order {
            digest = (digest ^ s as u64).wrapping_mul(0x0100_0000_01b3);
            if let Some(class) = perc.open(s as usize) {
                let cell = region.cells[s as usize];
                let merge_level = f.value(cell);
                let realizing_class = match region.goal {
                    Goal::Terminals => Realization::Crossing,
                    Goal::Winding { .. } => Realization::Winding { class },
                };
                return Ok(ThresholdResult {
                    t_value: -merge_level,
                    saddle_cell: f.grid.coords(cell)[..f.grid.d()].to_vec(),
                    saddle_index: cell,
                    realizing_class,
                    merge_level,
                    sweep_order_digest: digest,
                });
            }
        }
        // only annuli can stay unrealized with every site open
        debug_assert!(matches!(self.event.kind, EventKind::Circuit { .. }));
        Ok(ThresholdResult {
            t_value: f64::INFINITY,
            saddle_cell: Vec::new(),
            saddle_index: usize::MAX,
            realizing_class: Realization::Never,
            merge_level: f64::NEG_INFINITY,
            sweep_order_digest: digest,
        })
    }
}

/// `T_A(f)`: opens sites in descending order until the event appears.
pub fn threshold_sweep(f: &FieldSample, e: &EventSpec, conn: Connectivity) -> Result<ThresholdResult> {
    ThresholdEngine::new(&f.grid, e, conn)?.sweep(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub t: f64,
    /// `(T(f) - T(f + t v)) / t`, oriented so that `v = 1` gives exactly 1.
    pub quotient: f64,
    /// `v` at the saddle of `f`.
    pub predicted: f64,
}

/// Finite-difference quotients of the threshold in direction `v`.
pub fn saddle_derivative_check(
    f: &FieldSample,
    e: &EventSpec,
    v: &FieldSample,
    t_list: &[f64],
    conn: Connectivity,
) -> Result<Vec<DerivativeRow>> {
    if v.grid != f.grid {
        return Err(Error::GridMismatch { kernel: f.grid.describe(), noise: v.grid.describe() });
    }
    let engine = ThresholdEngine::new(&f.grid, e, conn)?;
    let base = engine.sweep(f)?;
    if !base.t_value.is_finite() {
        return Err(Error::Domain("event never realized; no saddle".into()));
    }
    let s = base.saddle_index;
    let predicted = v.value(s);
    t_list
        .iter()
        .map(|&t| {
            let mut g = f.clone();
            for (i, x) in g.values.iter_mut().enumerate() {
                *x += t * v.value(i);
            }
            let m = engine.sweep(&g)?.saddle_index;
            // T(f) - T(f + tv) = (f + tv)(m) - f(s), grouped so that m = s yields v(s) exactly
            let quotient = ((f.values[m] - f.values[s]) + t * v.value(m)) / t;
            Ok(DerivativeRow { t, quotient, predicted })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::topology::events::evaluate_event;

    fn g(n: usize) -> TorusGrid {
        TorusGrid::square(n, n as f64).unwrap()
    }

    #[test]
    fn constant_field_threshold() {
        let f = FieldSample::from_values(g(6), vec![0.7; 36]).unwrap();
        let r = threshold_sweep(&f, &EventSpec::loop_event(0), Connectivity::Four).unwrap();
        assert_eq!(r.t_value, -0.7);
        // ties open in index order, so the first row closes at its last cell
        assert_eq!(r.saddle_cell, vec![5, 0]);
        assert_eq!(r.realizing_class, Realization::Winding { class: [1, 0, 0] });
    }

    #[test]
    fn cosine_band_threshold_is_the_row_maximum() {
        let f = FieldSample::from_fn(g(16), |x| (std::f64::consts::TAU * x[1] / 16.0).cos()).unwrap();
        let r = threshold_sweep(&f, &EventSpec::loop_event(0), Connectivity::Four).unwrap();
        assert_eq!(r.t_value, -1.0);
        assert_eq!(r.saddle_cell[1], 0);
    }

    #[test]
    fn threshold_brackets_event() {
        let f = FieldSample::from_fn(g(12), |x| (x[0] * 0.7).sin() + (x[1] * 1.3).cos() * 0.8 + x[0] * 0.01).unwrap();
        for e in [EventSpec::loop_event(0), EventSpec::cross_dagger(2.0), EventSpec::circuit(1.0, 4.0).at([6.0, 6.0], 0)] {
            let r = threshold_sweep(&f, &e, Connectivity::Four).unwrap();
            assert!(evaluate_event(&f, r.t_value + 1e-12, &e, Connectivity::Four).unwrap());
            assert!(!evaluate_event(&f, r.t_value - 1e-9, &e, Connectivity::Four).unwrap());
        }
    }

    #[test]
    fn complement_is_rejected() {
        let f = FieldSample::from_values(g(4), vec![1.0; 16]).unwrap();
        assert!(matches!(
            threshold_sweep(&f, &EventSpec::loop_event(0).complemented(), Connectivity::Four),
            Err(Error::NonIncreasingEvent(_))
        ));
    }

    #[test]
    fn unit_direction_gives_unit_quotient() {
        let f = FieldSample::from_fn(g(12), |x| (x[0] * 0.9).sin() * (x[1] * 0.4).cos()).unwrap();
        let v = FieldSample::from_values(g(12), vec![1.0; 144]).unwrap();
        for row in saddle_derivative_check(&f, &EventSpec::loop_event(0), &v, &[0.5, 0.25, 0.125], Connectivity::Four).unwrap() {
            assert_eq!(row.quotient, 1.0);
            assert_eq!(row.predicted, 1.0);
        }
    }

    #[test]
    fn degenerate_annulus_is_never_realized_when_empty() {
        // r1 = r2 = 1.5 selects no lattice sites at all
        let f = FieldSample::from_values(g(16), vec![1.0; 256]).unwrap();
        let r = threshold_sweep(&f, &EventSpec::circuit(1.5, 1.5).at([8.0, 8.0], 0), Connectivity::Four).unwrap();
        assert_eq!(r.t_value, f64::INFINITY);
        assert_eq!(r.realizing_class, Realization::Never);
    }
}
