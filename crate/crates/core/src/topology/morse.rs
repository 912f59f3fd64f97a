use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::FieldSample;

/// Link of a vertex in the triangulation obtained by cutting every square along
/// its `(0,0)-(1,1)` diagonal, listed in cyclic order.
pub const LINK: [(i64, i64); 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];

/// Resolution below which two critical values count as equal.
pub const VALUE_RESOLUTION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub n_max: usize,
    pub n_min: usize,
    /// Saddles weighted by multiplicity (a monkey saddle counts twice).
    pub n_saddle: usize,
    pub euler: i64,
    pub distinct_critical_values: bool,
    /// Smallest gap between sorted critical values; infinite with fewer than two.
    pub min_critical_gap: f64,
    /// Cells whose link contains an exactly equal value, resolved only by index order.
    pub degenerate_cells: usize,
}

impl MorseReport {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_cells > 0
    }
}

/// Counts lower-link sign changes around each vertex, with ties broken by cell index.
pub fn morse_report(f: &FieldSample) -> Result<MorseReport> {
    let g = f.grid;
    if g.d() != 2 {
        return Err(Error::UnsupportedDimension(g.d()));
    }
    let above = |a: usize, b: usize| {
        let (va, vb) = (f.values[a], f.values[b]);
        va > vb || (va == vb && a > b)
    };
    let (mut n_max, mut n_min, mut n_saddle, mut degenerate) = (0usize, 0usize, 0usize, 0usize);
    let mut critical = Vec::new();
    for i in 0..g.len() {
        let ring: Vec<usize> = LINK.iter().map(|&(dx, dy)| g.offset_index(i, &[dx, dy])).collect();
        if ring.iter().any(|&j| j != i && f.values[j] == f.values[i]) {
            degenerate += 1;
        }
        let up: Vec<bool> = ring.iter().map(|&j| above(j, i)).collect();
        let changes = (0..up.len()).filter(|&k| up[k] != up[(k + 1) % up.len()]).count();
        if changes == 0 {
            if up[0] {
                n_min += 1;
            } else {
                n_max += 1;
            }
            critical.push(f.values[i]);
        } else if changes >= 4 {
            n_saddle += changes / 2 - 1;
            critical.push(f.values[i]);
        }
    }
    critical.sort_by(f64::total_cmp);
    let min_gap = critical.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok(MorseReport {
        n_max,
        n_min,
        n_saddle,
        euler: n_min as i64 - n_saddle as i64 + n_max as i64,
        distinct_critical_values: min_gap > VALUE_RESOLUTION,
        min_critical_gap: min_gap,
        degenerate_cells: degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use std::f64::consts::TAU;

    #[test]
    fn explicit_morse_function() {
        let g = TorusGrid::square(32, 32.0).unwrap();
        let f = FieldSample::from_fn(g, |x| (TAU * x[0] / 32.0).cos() + 0.5 * (TAU * x[1] / 32.0).cos() + 1e-6 * x[0] * x[1] / 1024.0).unwrap();
        let r = morse_report(&f).unwrap();
        assert_eq!((r.n_max, r.n_min, r.n_saddle, r.euler), (1, 1, 2, 0), "{r:?}");
    }

    #[test]
    fn constant_field_is_flagged() {
        let g = TorusGrid::square(8, 8.0).unwrap();
        let r = morse_report(&FieldSample::from_values(g, vec![2.0; 64]).unwrap()).unwrap();
        assert!(r.is_degenerate());
        assert_eq!(r.degenerate_cells, 64);
        assert_eq!(r.euler, 0);
    }
}
