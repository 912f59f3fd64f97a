use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square periodic grid of `n^d` cells on a torus of side `side`.
///
/// Cell `(i_0, .., i_{d-1})` sits at the lattice point `h * (i_0, .., i_{d-1})`
/// with `h = side / n`; the flat index is `i_0 + n * i_1 + n^2 * i_2`, so the
/// first coordinate varies fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    d: usize,
    n: usize,
    side: f64,
}

impl TorusGrid {
    pub fn new(d: usize, n: usize, side: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("n must be positive".into()));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidGrid(format!("side {side} must be finite and positive")));
        }
        if n.checked_pow(d as u32).is_none_or(|c| c > 1 << 28) {
            return Err(Error::InvalidGrid(format!("{n}^{d} cells is too many")));
        }
        Ok(Self { d, n, side })
    }

    /// Two-dimensional grid, the common case.
    pub fn square(n: usize, side: f64) -> Result<Self> {
        Self::new(2, n, side)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Grid spacing `side / n`.
    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Torus volume `side^d`.
    pub fn volume(&self) -> f64 {
        self.side.powi(self.d as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.d]
    }

    /// Coordinates of a flat index.
    pub fn coords(&self, mut index: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for slot in c.iter_mut().take(self.d) {
            *slot = index % self.n;
            index /= self.n;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .take(self.d)
            .rev()
            .fold(0, |acc, &c| acc * self.n + c % self.n)
    }

    /// Flat index of `base + offset` with periodic wrap.
    pub fn offset_index(&self, base: usize, offset: &[i64]) -> usize {
        let c = self.coords(base);
        let n = self.n as i64;
        let mut moved = [0usize; 3];
        for k in 0..self.d {
            let o = offset.get(k).copied().unwrap_or(0);
            moved[k] = (c[k] as i64 + o).rem_euclid(n) as usize;
        }
        self.index(&moved[..self.d])
    }

    /// Minimum-image physical displacement of a cell from the origin.
    pub fn displacement(&self, index: usize) -> [f64; 3] {
        let c = self.coords(index);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for k in 0..self.d {
            let mut i = c[k] as i64;
            if 2 * i >= self.n as i64 {
                i -= self.n as i64;
            }
            x[k] = i as f64 * h;
        }
        x
    }

    pub fn describe(&self) -> String {
        format!("d={} n={} side={}", self.d, self.n, self.side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_bookkeeping() {
        let g = TorusGrid::new(2, 24, 12.0).unwrap();
        assert!((g.cell_volume() * g.len() as f64 - g.volume()).abs() < 1e-9);
        let g3 = TorusGrid::new(3, 8, 3.0).unwrap();
        assert!((g3.cell_volume() * 512.0 - 27.0).abs() < 1e-12);
    }

    #[test]
    fn index_roundtrip_and_wrap() {
        let g = TorusGrid::square(8, 8.0).unwrap();
        let i = g.index(&[3, 5]);
        assert_eq!(i, 3 + 8 * 5);
        assert_eq!(&g.coords(i)[..2], &[3, 5]);
        assert_eq!(g.offset_index(g.index(&[7, 0]), &[1, -1]), g.index(&[0, 7]));
        assert_eq!(g.displacement(g.index(&[6, 1]))[0], -2.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TorusGrid::new(4, 8, 1.0).is_err());
        assert!(TorusGrid::square(0, 1.0).is_err());
        assert!(TorusGrid::square(8, -1.0).is_err());
        assert!(TorusGrid::square(1, 3.0).is_ok());
    }
}
