use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{convolve_field, draw_field_indexed, Route};
use super::noise::{draw_white_noise, sample_seed, WhiteNoiseEps};
use crate::error::{Error, Result};
use crate::experiments::stats::{mean, pairwise_sum, sample_variance, Estimate};
use crate::grid::TorusGrid;
use crate::kernel::{make_kernel, Kernel, KernelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub anchor: Vec<usize>,
    pub offsets: Vec<Vec<i64>>,
    pub empirical: Vec<f64>,
    pub se: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub n_samples: usize,
    /// Largest `|empirical - theoretical| / se` over the offsets.
    pub max_abs_deviation: f64,
}

/// Empirical `Cov(f(0), f(x))` on white-noise samples.
pub fn estimate_covariance(k: &Kernel, n_samples: usize, seed: u64, offsets: &[Vec<i64>]) -> Result<CovarianceEstimate> {
    estimate_covariance_at(k, n_samples, seed, &[0, 0, 0][..k.grid.d()], offsets, Route::WhiteNoise)
}

/// Empirical `Cov(f(a), f(a + x))` for an arbitrary anchor `a` and route.
pub fn estimate_covariance_at(
    k: &Kernel,
    n_samples: usize,
    seed: u64,
    anchor: &[usize],
    offsets: &[Vec<i64>],
    route: Route,
) -> Result<CovarianceEstimate> {
    if n_samples < 100 {
        return Err(Error::Domain(format!("covariance needs at least 100 samples, got {n_samples}")));
    }
    let g = k.grid;
    let a = g.index(anchor);
    let targets: Vec<usize> = offsets.iter().map(|o| g.offset_index(a, o)).collect();
    let draws: Vec<(f64, Vec<f64>)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let f = draw_field_indexed(k, seed, i, route)?;
            Ok((f.values[a], targets.iter().map(|&t| f.values[t]).collect()))
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let xm = mean(&x);
    let n = n_samples as f64;
    let mut empirical = Vec::new();
    let mut se = Vec::new();
    let mut theoretical = Vec::new();
    let mut worst = 0.0f64;
    for (j, o) in offsets.iter().enumerate() {
        let y: Vec<f64> = draws.iter().map(|d| d.1[j]).collect();
        let ym = mean(&y);
        let prod: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).collect();
        let cov = pairwise_sum(&prod) / (n - 1.0);
        let s = (sample_variance(&prod) / n).sqrt();
        let theo = k.kappa[g.offset_index(0, o)];
        worst = worst.max((cov - theo).abs() / s);
        empirical.push(cov);
        se.push(s);
        theoretical.push(theo);
    }
    Ok(CovarianceEstimate {
        anchor: anchor.to_vec(),
        offsets: offsets.to_vec(),
        empirical,
        se,
        theoretical,
        n_samples,
        max_abs_deviation: worst,
    })
}

/// Sums fine coefficients into the nested coarse lattice of `n` cells per side.
pub fn coarsen_noise(w: &WhiteNoiseEps, n: usize) -> Result<WhiteNoiseEps> {
    let fine = w.grid;
    if n == 0 || fine.n() % n != 0 {
        return Err(Error::NonNested(format!("{n} does not divide {}", fine.n())));
    }
    let r = fine.n() / n;
    let coarse = TorusGrid::new(fine.d(), n, fine.side())?;
    let mut coeffs = vec![0.0; coarse.len()];
    for (i, &c) in w.coeffs.iter().enumerate() {
        let mut cc = fine.coords(i);
        cc.iter_mut().for_each(|v| *v /= r);
        coeffs[coarse.index(&cc[..fine.d()])] += c;
    }
    Ok(WhiteNoiseEps { grid: coarse, coeffs, seed: w.seed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationRow {
    pub n: usize,
    /// `E sup |f_n - f_2n|` over the coarse lattice.
    pub mean_sup_error: f64,
    pub sup_se: f64,
    /// `E |f_n(x) - f_2n(x)|^2` averaged over coarse lattice points.
    pub mean_sq_error: f64,
    pub mean_sq_se: f64,
}

/// Couples `f_n` and `f_2n` for every `n` in `n_list` through one white noise on the finest lattice.
pub fn approximation_error_scan(
    spec: &KernelSpec,
    d: usize,
    side: f64,
    n_list: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<ApproximationRow>> {
    if n_list.is_empty() {
        return Err(Error::NonNested("empty resolution list".into()));
    }
    for w in n_list.windows(2) {
        if w[1] <= w[0] || w[1] % w[0] != 0 {
            return Err(Error::NonNested(format!("{} does not refine {}", w[1], w[0])));
        }
    }
    let finest = 2 * n_list[n_list.len() - 1];
    let mut levels: Vec<usize> = n_list.iter().flat_map(|&n| [n, 2 * n]).collect();
    levels.sort_unstable();
    levels.dedup();
    let raw = KernelSpec { normalize_sigma: false, ..spec.clone() };
    let fine_grid = TorusGrid::new(d, finest, side)?;
    let scale = if spec.normalize_sigma { 1.0 / make_kernel(&raw, &fine_grid)?.sigma } else { 1.0 };
    let kernels: Vec<(usize, Kernel)> = levels
        .iter()
        .map(|&n| Ok((n, make_kernel(&raw, &TorusGrid::new(d, n, side)?)?.scaled(scale)?)))
        .collect::<Result<_>>()?;
    let kernel_for = |n: usize| &kernels.iter().find(|(m, _)| *m == n).expect("level present").1;

    let per_sample: Vec<Vec<(f64, f64)>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let w = draw_white_noise(&fine_grid, sample_seed(seed, i));
            let mut fields = Vec::new();
            for &n in &levels {
                let f = convolve_field(kernel_for(n), &coarsen_noise(&w, n)?)?;
                fields.push((n, f.values));
            }
            let field = |n: usize| &fields.iter().find(|(m, _)| *m == n).expect("level present").1;
            n_list
                .iter()
                .map(|&n| {
                    let coarse = TorusGrid::new(d, n, side)?;
                    let fine = TorusGrid::new(d, 2 * n, side)?;
                    let (fc, ff) = (field(n), field(2 * n));
                    let mut sup = 0.0f64;
                    let mut sq = Vec::with_capacity(coarse.len());
                    for c in 0..coarse.len() {
                        let mut cc = coarse.coords(c);
                        cc.iter_mut().for_each(|v| *v *= 2);
                        let e = fc[c] - ff[fine.index(&cc[..d])];
                        sup = sup.max(e.abs());
                        sq.push(e * e);
                    }
                    Ok((sup, mean(&sq)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    Ok(n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let sups: Vec<f64> = per_sample.iter().map(|s| s[j].0).collect();
            let sqs: Vec<f64> = per_sample.iter().map(|s| s[j].1).collect();
            let sup = Estimate::mean("sup", &sups);
            let sq = Estimate::mean("sq", &sqs);
            ApproximationRow { n, mean_sup_error: sup.value, sup_se: sup.se, mean_sq_error: sq.value, mean_sq_se: sq.se }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormDiagnostic {
    pub mean_sup: f64,
    pub se: f64,
    /// `sigma (1 + |ln |T||)^(1/2)`, the bound's shape without its constant.
    pub bound: f64,
    pub ratio: f64,
    pub n_samples: usize,
}

pub fn sup_norm_diagnostic(k: &Kernel, n_samples: usize, seed: u64) -> Result<SupNormDiagnostic> {
    let sups: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| Ok(draw_field_indexed(k, seed, i, Route::WhiteNoise)?.sup_norm()))
        .collect::<Result<_>>()?;
    let e = Estimate::mean("sup", &sups);
    let bound = k.sigma * (1.0 + k.grid.volume().ln().abs()).sqrt();
    Ok(SupNormDiagnostic { mean_sup: e.value, se: e.se, bound, ratio: e.value / bound, n_samples })
}
