//! Multidimensional FFT over a [`TorusGrid`] built from 1-D `rustfft` passes.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::grid::TorusGrid;

/// Forward and inverse plans for one grid shape.
#[derive(Clone)]
pub struct GridFft {
    d: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GridFft(d={}, n={})", self.d, self.n)
    }
}

impl GridFft {
    pub fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            d: grid.d(),
            n: grid.n(),
            forward: planner.plan_fft_forward(grid.n()),
            inverse: planner.plan_fft_inverse(grid.n()),
        }
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform in place, including the `1/n^d` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n.pow(self.d as u32));
        if n == 1 {
            return;
        }
        let mut line = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for axis in 0..self.d {
            let stride = n.pow(axis as u32);
            for start in 0..data.len() {
                // each line is visited from its element with coordinate 0 on `axis`
                if (start / stride) % n != 0 {
                    continue;
                }
                for k in 0..n {
                    line[k] = data[start + k * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for k in 0..n {
                    data[start + k * stride] = line[k];
                }
            }
        }
    }
}

pub fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Circular convolution `out[i] = sum_j a[j] b[i - j]` through a precomputed spectrum of `b`.
pub fn convolve_with_spectrum(fft: &GridFft, a: &[f64], b_hat: &[Complex64]) -> Vec<f64> {
    let mut buf = to_complex(a);
    fft.forward(&mut buf);
    buf.iter_mut().zip(b_hat).for_each(|(x, y)| *x *= y);
    fft.inverse(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_3d() {
        let g = TorusGrid::new(3, 6, 1.0).unwrap();
        let fft = GridFft::new(&g);
        let orig: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut buf = orig.clone();
        fft.forward(&mut buf);
        fft.inverse(&mut buf);
        for (a, b) in orig.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_transforms_to_phase() {
        let g = TorusGrid::square(4, 1.0).unwrap();
        let fft = GridFft::new(&g);
        let mut buf = vec![Complex64::default(); 16];
        buf[g.index(&[1, 0])] = Complex64::new(1.0, 0.0);
        fft.forward(&mut buf);
        // X[k0, k1] = exp(-2 pi i k0 / 4)
        let x = buf[g.index(&[1, 3])];
        assert!((x - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }
}
