//! Order-stable reductions and the standard errors attached to every estimate.
//!
//! Sums are pairwise over the input in index order, so a result depends only on
//! the per-sample values and never on how the samples were scheduled.

use serde::{Deserialize, Serialize};

/// SE multiplier used by every verdict.
pub const SE_MULTIPLIER: f64 = 3.0;

const LEAF: usize = 32;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_map(xs, |x| x)
}

pub fn pairwise_sum_map(xs: &[f64], f: impl Fn(f64) -> f64 + Copy) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |acc, &x| acc + f(x));
    }
    let mid = xs.len() / 2;
    pairwise_sum_map(&xs[..mid], f) + pairwise_sum_map(&xs[mid..], f)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    pairwise_sum_map(xs, |x| (x - m) * (x - m)) / (xs.len() - 1) as f64
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn new(name: impl Into<String>, value: f64, se: f64, n: usize) -> Self {
        Self { name: name.into(), value, se, n }
    }

    /// Proportion of `true` with binomial SE.
    pub fn proportion(name: impl Into<String>, hits: &[bool]) -> Self {
        let n = hits.len();
        let k = hits.iter().filter(|&&h| h).count();
        let p = k as f64 / n.max(1) as f64;
        Self::new(name, p, (p * (1.0 - p) / n.max(1) as f64).sqrt(), n)
    }

    pub fn mean(name: impl Into<String>, xs: &[f64]) -> Self {
        let n = xs.len();
        Self::new(name, mean(xs), (sample_variance(xs) / n as f64).sqrt(), n)
    }

    /// Sample variance with a delete-one jackknife SE.
    pub fn variance(name: impl Into<String>, xs: &[f64]) -> Self {
        let n = xs.len();
        Self::new(name, sample_variance(xs), jackknife_variance_se(xs), n)
    }

    /// Upper edge of the `k`-SE interval.
    pub fn upper(&self, k: f64) -> f64 {
        self.value + k * self.se
    }

    pub fn lower(&self, k: f64) -> f64 {
        self.value - k * self.se
    }
}

/// Jackknife SE of the unbiased sample variance, using closed-form leave-one-out values.
pub fn jackknife_variance_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 3 {
        return f64::NAN;
    }
    let nf = n as f64;
    let m = mean(xs);
    let m2 = pairwise_sum_map(xs, |x| (x - m) * (x - m));
    let loo: Vec<f64> = xs.iter().map(|&x| (m2 - (x - m) * (x - m) * nf / (nf - 1.0)) / (nf - 2.0)).collect();
    let lm = mean(&loo);
    ((nf - 1.0) / nf * pairwise_sum_map(&loo, |v| (v - lm) * (v - lm))).sqrt()
}

/// `P(A and B) - P(A) P(B)` with a delta-method SE.
pub fn covariance_of_indicators(a: &[bool], b: &[bool]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let fa: Vec<f64> = a.iter().map(|&x| x as u8 as f64).collect();
    let fb: Vec<f64> = b.iter().map(|&x| x as u8 as f64).collect();
    let fab: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let (pa, pb, pab) = (mean(&fa), mean(&fb), mean(&fab));
    let z: Vec<f64> = (0..a.len()).map(|i| fab[i] - pb * fa[i] - pa * fb[i]).collect();
    (pab - pa * pb, (sample_variance(&z) / n).sqrt())
}

/// `lhs <= rhs` tested with `SE_MULTIPLIER` standard errors of slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub se: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, se: f64) -> Self {
        Self { name: name.into(), lhs, rhs, slack: rhs - lhs, se, pass: lhs <= rhs + SE_MULTIPLIER * se }
    }
}
