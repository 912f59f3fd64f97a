//! Convolution kernels on the torus and the scalar functionals derived from them.

use nalgebra::{DMatrix, SymmetricEigen};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::fft::{to_complex, GridFft};
use crate::grid::TorusGrid;

/// Minimum number of cells across a kernel's characteristic width.
pub const MIN_CELLS_PER_WIDTH: f64 = 8.0;

/// Analytic shape of `q`. Lengths are physical; `|x|` is scaled by `width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// `exp(-|x|^2 / width^2)`.
    BargmannFock { width: f64 },
    /// `(1 - a |x|^2 / width^2) exp(-|x|^2 / width^2)`.
    Oscillatory { width: f64, a: f64 },
    /// `(1 + |x|^2 / width^2)^(-beta / 2)`; requires `beta > 2`.
    TruncatedPolynomialDecay { width: f64, beta: f64 },
    /// `q = value` everywhere on the torus.
    Constant { value: f64 },
    /// Tabulated values on an `n^d` grid, first coordinate fastest.
    CustomTable { n: usize, values: Vec<f64> },
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BargmannFock { .. } => "bargmann_fock",
            Self::Oscillatory { .. } => "oscillatory",
            Self::TruncatedPolynomialDecay { .. } => "truncated_polynomial_decay",
            Self::Constant { .. } => "constant",
            Self::CustomTable { .. } => "custom_table",
        }
    }

    /// Physical length that must be resolved by the grid, if any.
    pub fn characteristic_width(&self) -> Option<f64> {
        match self {
            Self::BargmannFock { width }
            | Self::Oscillatory { width, .. }
            | Self::TruncatedPolynomialDecay { width, .. } => Some(4.0 * width),
            Self::Constant { .. } | Self::CustomTable { .. } => None,
        }
    }

    fn eval(&self, r2: f64) -> f64 {
        match *self {
            Self::BargmannFock { width } => (-r2 / (width * width)).exp(),
            Self::Oscillatory { width, a } => {
                let s = r2 / (width * width);
                (1.0 - a * s) * (-s).exp()
            }
            Self::TruncatedPolynomialDecay { width, beta } => (1.0 + r2 / (width * width)).powf(-beta / 2.0),
            Self::Constant { value } => value,
            Self::CustomTable { .. } => unreachable!("tables are not evaluated pointwise"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub family: KernelFamily,
    /// Smooth truncation: `q` is multiplied by a cutoff equal to 1 on `|x| <= r_cut / 2`
    /// and 0 on `|x| >= r_cut` before periodization.
    #[serde(default)]
    pub r_cut: Option<f64>,
    #[serde(default)]
    pub normalize_sigma: bool,
}

impl KernelSpec {
    pub fn new(family: KernelFamily) -> Self {
        Self { family, r_cut: None, normalize_sigma: false }
    }

    pub fn bargmann_fock(width: f64) -> Self {
        Self::new(KernelFamily::BargmannFock { width })
    }

    pub fn constant(value: f64) -> Self {
        Self::new(KernelFamily::Constant { value })
    }

    pub fn normalized(mut self) -> Self {
        self.normalize_sigma = true;
        self
    }

    pub fn with_cutoff(mut self, r_cut: f64) -> Self {
        self.r_cut = Some(r_cut);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidKernel(msg));
        let finite_pos = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidKernel(format!("{name} = {v} must be finite and positive")))
            }
        };
        match &self.family {
            KernelFamily::BargmannFock { width } => finite_pos("width", *width)?,
            KernelFamily::Oscillatory { width, a } => {
                finite_pos("width", *width)?;
                if !a.is_finite() {
                    return bad(format!("oscillation coefficient {a} is not finite"));
                }
            }
            KernelFamily::TruncatedPolynomialDecay { width, beta } => {
                finite_pos("width", *width)?;
                if !(beta.is_finite() && *beta > 2.0) {
                    return bad(format!("decay exponent {beta} must exceed 2"));
                }
            }
            KernelFamily::Constant { value } => {
                if !value.is_finite() {
                    return bad(format!("constant {value} is not finite"));
                }
            }
            KernelFamily::CustomTable { values, .. } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("table contains non-finite values".into());
                }
            }
        }
        if let Some(r) = self.r_cut {
            finite_pos("r_cut", r)?;
        }
        Ok(())
    }
}

/// Smooth step: 1 on `[0, 1/2]`, 0 on `[1, inf)`, C-infinity in between.
fn cutoff(s: f64) -> f64 {
    if s <= 0.5 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let bump = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let u = 2.0 * (1.0 - s);
    bump(u) / (bump(u) + bump(1.0 - u))
}

/// A kernel tabulated on a torus grid together with its covariance.
#[derive(Clone)]
pub struct Kernel {
    pub spec: KernelSpec,
    pub grid: TorusGrid,
    /// Periodized `q` at each cell.
    pub values: Vec<f64>,
    /// `kappa(x) = sum_y q(y) q(y + x) * cell_volume`, the covariance of `q * W`.
    pub kappa: Vec<f64>,
    pub sigma: f64,
    pub l1_norm: f64,
    pub l2_norm: f64,
    pub alpha: f64,
    id: String,
    fft: GridFft,
    spectrum: Arc<Vec<Complex64>>,
    kappa_spectrum: OnceLock<Arc<Vec<f64>>>,
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel")
            .field("family", &self.spec.family.name())
            .field("grid", &self.grid)
            .field("sigma", &self.sigma)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl Kernel {
    /// Short digest identifying spec, grid and scale.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn fft(&self) -> &GridFft {
        &self.fft
    }

    /// Unnormalized DFT of `values`.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Real part of the DFT of `kappa`: the eigenvalues of the field's circulant covariance.
    pub fn kappa_spectrum(&self) -> Arc<Vec<f64>> {
        self.kappa_spectrum
            .get_or_init(|| {
                let mut buf = to_complex(&self.kappa);
                self.fft.forward(&mut buf);
                Arc::new(buf.into_iter().map(|z| z.re).collect())
            })
            .clone()
    }

    /// Returns a copy with `values` multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Kernel> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("scale {c} must be positive")));
        }
        let values = self.values.iter().map(|v| v * c).collect();
        Kernel::from_values(self.spec.clone(), self.grid, values)
    }

    /// Builds a kernel from explicit cell values, skipping analytic evaluation.
    pub fn from_values(spec: KernelSpec, grid: TorusGrid, values: Vec<f64>) -> Result<Kernel> {
        if values.len() != grid.len() {
            return Err(Error::InvalidKernel(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroKernel);
        }
        let fft = GridFft::new(&grid);
        let cv = grid.cell_volume();
        let mut spec_q = to_complex(&values);
        fft.forward(&mut spec_q);
        let mut power: Vec<Complex64> = spec_q.iter().map(|z| Complex64::new(z.norm_sqr() * cv, 0.0)).collect();
        fft.inverse(&mut power);
        let kappa: Vec<f64> = power.into_iter().map(|z| z.re).collect();
        let l1_norm = cv * crate::experiments::stats::pairwise_sum_map(&values, f64::abs);
        let l2_norm = (cv * crate::experiments::stats::pairwise_sum_map(&values, |v| v * v)).sqrt();
        let sigma = kappa[0].max(0.0).sqrt();
        let alpha = alpha_from_norms(l1_norm, l2_norm, grid.volume())?;
        let id = kernel_digest(&spec, &grid, &values);
        Ok(Kernel { spec, grid, values, kappa, sigma, l1_norm, l2_norm, alpha, id, fft, spectrum: Arc::new(spec_q), kappa_spectrum: OnceLock::new() })
    }
}

fn kernel_digest(spec: &KernelSpec, grid: &TorusGrid, values: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(spec).unwrap_or_default());
    h.update(serde_json::to_vec(grid).unwrap_or_default());
    for v in values {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Periodized values of an analytic family on `grid`, before any normalization.
pub fn tabulate(spec: &KernelSpec, grid: &TorusGrid) -> Result<Vec<f64>> {
    spec.validate()?;
    if let KernelFamily::CustomTable { n, values } = &spec.family {
        if *n != grid.n() || values.len() != grid.len() {
            return Err(Error::GridMismatch {
                kernel: format!("table n={n} with {} values", values.len()),
                noise: grid.describe(),
            });
        }
        return Ok(values.clone());
    }
    if let Some(width) = spec.family.characteristic_width() {
        let cells = width / grid.spacing();
        if cells < MIN_CELLS_PER_WIDTH - 1e-9 {
            return Err(Error::KernelUnderresolved { cells, required: MIN_CELLS_PER_WIDTH });
        }
    }
    let d = grid.d();
    let side = grid.side();
    // image layers needed so that every point within the cutoff radius is summed
    let layers = match spec.r_cut {
        Some(r) => (r / side).ceil() as i64 + 1,
        None => 1,
    };
    let family = &spec.family;
    let images: Vec<[i64; 3]> = {
        let span = -layers..=layers;
        let mut out = Vec::new();
        for a in span.clone() {
            for b in if d >= 2 { span.clone() } else { 0..=0 } {
                for c in if d >= 3 { span.clone() } else { 0..=0 } {
                    out.push([a, b, c]);
                }
            }
        }
        out
    };
    let values = (0..grid.len())
        .map(|i| {
            if let KernelFamily::Constant { value } = family {
                return *value;
            }
            let x = grid.displacement(i);
            let mut acc = 0.0;
            for k in &images {
                let mut r2 = 0.0;
                for axis in 0..d {
                    let y = x[axis] + k[axis] as f64 * side;
                    r2 += y * y;
                }
                let chi = match spec.r_cut {
                    Some(rc) => cutoff(r2.sqrt() / rc),
                    None => 1.0,
                };
                if chi > 0.0 {
                    acc += chi * family.eval(r2);
                }
            }
            acc
        })
        .collect();
    Ok(values)
}

/// Tabulates, periodizes and (optionally) normalizes a kernel on `grid`.
pub fn make_kernel(spec: &KernelSpec, grid: &TorusGrid) -> Result<Kernel> {
    let values = tabulate(spec, grid)?;
    let k = Kernel::from_values(spec.clone(), *grid, values)?;
    if spec.normalize_sigma {
        normalize(k)
    } else {
        Ok(k)
    }
}

fn normalize(k: Kernel) -> Result<Kernel> {
    if k.kappa[0] <= 0.0 {
        return Err(Error::ZeroKernel);
    }
    let s = k.kappa[0].sqrt();
    let values: Vec<f64> = k.values.iter().map(|v| v / s).collect();
    let mut out = Kernel::from_values(k.spec.clone(), k.grid, values)?;
    let k0 = out.kappa[0];
    out.kappa.iter_mut().for_each(|v| *v /= k0);
    out.sigma = 1.0;
    Ok(out)
}

/// `[1 + |ln(l2 / l1 * sqrt(volume))|]^(-1/2)`.
pub fn alpha_from_norms(l1: f64, l2: f64, volume: f64) -> Result<f64> {
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::ZeroKernel);
    }
    Ok((1.0 + (l2 / l1 * volume.sqrt()).ln().abs()).powf(-0.5))
}

pub fn alpha(k: &Kernel) -> Result<f64> {
    alpha_from_norms(k.l1_norm, k.l2_norm, k.grid.volume())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `min kappa >= -weak_positivity * sigma^2`.
    pub weak_positivity: f64,
    /// `min q >= -strong_positivity * max |q|`.
    pub strong_positivity: f64,
    /// Relative residual under the symmetry group.
    pub symmetry: f64,
    /// Minimum decay exponent.
    pub decay_beta: f64,
    /// Eigenvalue floor relative to `sigma^2`.
    pub nondegeneracy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { weak_positivity: 1e-12, strong_positivity: 1e-12, symmetry: 1e-9, decay_beta: 2.0, nondegeneracy: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakPositivity {
    pub pass: bool,
    pub min_kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongPositivity {
    pub pass: bool,
    pub min_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symmetry {
    pub pass: bool,
    pub max_asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub pass: bool,
    /// Infinite when `q` vanishes on the whole fitting annulus.
    pub fitted_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    pub pass: bool,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub weak_positivity: WeakPositivity,
    pub strong_positivity: StrongPositivity,
    pub symmetry: Symmetry,
    pub decay: Decay,
    pub nondegeneracy: Nondegeneracy,
    pub tolerances: Tolerances,
}

impl ConditionReport {
    /// Checks a run depends on; strong positivity is informational.
    pub fn required_failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.weak_positivity.pass {
            out.push("weak_positivity");
        }
        if !self.symmetry.pass {
            out.push("symmetry");
        }
        if !self.decay.pass {
            out.push("decay");
        }
        if !self.nondegeneracy.pass {
            out.push("nondegeneracy");
        }
        out
    }

    /// Flat `key -> value` view for summaries.
    pub fn flatten(&self) -> Vec<(String, serde_json::Value)> {
        use serde_json::json;
        vec![
            ("weak_positivity.pass".into(), json!(self.weak_positivity.pass)),
            ("weak_positivity.min_kappa".into(), json!(self.weak_positivity.min_kappa)),
            ("strong_positivity.pass".into(), json!(self.strong_positivity.pass)),
            ("strong_positivity.min_q".into(), json!(self.strong_positivity.min_q)),
            ("symmetry.pass".into(), json!(self.symmetry.pass)),
            ("symmetry.max_asymmetry".into(), json!(self.symmetry.max_asymmetry)),
            ("decay.pass".into(), json!(self.decay.pass)),
            ("decay.fitted_beta".into(), json!(finite_or_string(self.decay.fitted_beta))),
            ("nondegeneracy.pass".into(), json!(self.nondegeneracy.pass)),
            ("nondegeneracy.min_eigenvalue".into(), json!(self.nondegeneracy.min_eigenvalue)),
        ]
    }
}

fn finite_or_string(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::json!(v.to_string())
    }
}

pub fn validate_conditions(k: &Kernel, tol: &Tolerances) -> ConditionReport {
    let g = &k.grid;
    let s2 = k.sigma * k.sigma;
    let min_kappa = k.kappa.iter().copied().fold(f64::INFINITY, f64::min);
    let min_q = k.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max_q = k.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let weak_pass = min_kappa >= -tol.weak_positivity * s2;
    // q >= 0 forces kappa >= 0, so strong implies weak by construction
    let strong_pass = min_q >= -tol.strong_positivity * max_q && weak_pass;

    let max_asymmetry = symmetry_residual(&k.values, g) / max_q.max(f64::MIN_POSITIVE);
    let fitted_beta = fit_decay(&base_profile(k), g);
    let min_eigenvalue = covariance_min_eigenvalue(&k.kappa, g);

    ConditionReport {
        weak_positivity: WeakPositivity { pass: weak_pass, min_kappa },
        strong_positivity: StrongPositivity { pass: strong_pass, min_q },
        symmetry: Symmetry { pass: max_asymmetry <= tol.symmetry, max_asymmetry },
        decay: Decay { pass: fitted_beta > tol.decay_beta, fitted_beta },
        nondegeneracy: Nondegeneracy { pass: min_eigenvalue > tol.nondegeneracy * s2, min_eigenvalue },
        tolerances: *tol,
    }
}

/// Largest `|q(x) - q(gx)|` over the quarter turn and the reflection of the first two axes.
fn symmetry_residual(values: &[f64], g: &TorusGrid) -> f64 {
    if g.d() < 2 {
        // only the reflection x -> -x exists
        return (0..g.len())
            .map(|i| {
                let c = g.coords(i);
                let j = g.index(&[(g.n() - c[0]) % g.n()]);
                (values[i] - values[j]).abs()
            })
            .fold(0.0, f64::max);
    }
    let n = g.n();
    let neg = |c: usize| (n - c) % n;
    (0..g.len())
        .map(|i| {
            let c = g.coords(i);
            let mut rot = c;
            rot[0] = neg(c[1]);
            rot[1] = c[0];
            let mut refl = c;
            refl[1] = neg(c[1]);
            let r = (values[i] - values[g.index(&rot[..g.d()])]).abs();
            let s = (values[i] - values[g.index(&refl[..g.d()])]).abs();
            r.max(s)
        })
        .fold(0.0, f64::max)
}

/// Least-squares slope of `log |q|` against `log |x|` over `side/4 <= |x| <= side/2`, negated.
/// The planar profile `q(x)` on the minimum-image displacements, without periodization;
/// tables have no planar profile and are used as given.
fn base_profile(k: &Kernel) -> Vec<f64> {
    let family = &k.spec.family;
    if matches!(family, KernelFamily::CustomTable { .. } | KernelFamily::Constant { .. }) {
        return k.values.clone();
    }
    (0..k.grid.len())
        .map(|i| {
            let r2: f64 = k.grid.displacement(i).iter().map(|c| c * c).sum();
            let chi = k.spec.r_cut.map_or(1.0, |rc| cutoff(r2.sqrt() / rc));
            chi * family.eval(r2)
        })
        .collect()
}

fn fit_decay(values: &[f64], g: &TorusGrid) -> f64 {
    let (lo, hi) = (g.side() / 4.0, g.side() / 2.0);
    let mut pts = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let x = g.displacement(i);
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r >= lo && r <= hi && v != 0.0 {
            pts.push((r.ln(), v.abs().ln()));
        }
    }
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return f64::INFINITY;
    }
    -sxy / sxx
}

/// Smallest eigenvalue of the covariance of `(f(0), grad f(0))` from central differences of kappa.
fn covariance_min_eigenvalue(kappa: &[f64], g: &TorusGrid) -> f64 {
    let d = g.d();
    let h = g.spacing();
    let at = |off: &[i64]| kappa[g.offset_index(0, off)];
    let unit = |k: usize, s: i64| {
        let mut o = [0i64; 3];
        o[k] = s;
        o
    };
    let mut m = DMatrix::<f64>::zeros(d + 1, d + 1);
    m[(0, 0)] = kappa[0];
    for i in 0..d {
        let grad = (at(&unit(i, 1)) - at(&unit(i, -1))) / (2.0 * h);
        m[(0, i + 1)] = grad;
        m[(i + 1, 0)] = grad;
        for j in 0..d {
            let hess = if i == j {
                (at(&unit(i, 1)) - 2.0 * kappa[0] + at(&unit(i, -1))) / (h * h)
            } else {
                let mut pp = [0i64; 3];
                let mut pm = [0i64; 3];
                pp[i] = 1;
                pp[j] = 1;
                pm[i] = 1;
                pm[j] = -1;
                let mp = pm.map(|v| -v);
                let mm = pp.map(|v| -v);
                (at(&pp) - at(&pm) - at(&mp) + at(&mm)) / (4.0 * h * h)
            };
            // Cov(d_i f, d_j f) = -d_ij kappa(0)
            m[(i + 1, j + 1)] = -hess;
        }
    }
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(n: usize, side: f64) -> Kernel {
        make_kernel(&KernelSpec::bargmann_fock(1.0), &TorusGrid::square(n, side).unwrap()).unwrap()
    }

    #[test]
    fn constant_kernel_closed_forms() {
        let g = TorusGrid::square(8, 3.0).unwrap();
        let k = make_kernel(&KernelSpec::constant(0.7), &g).unwrap();
        let vol = g.volume();
        for v in &k.kappa {
            assert!((v - 0.49 * vol).abs() < 1e-12);
        }
        assert!((k.sigma - 0.7 * vol.sqrt()).abs() < 1e-12);
        assert!((k.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalized_sigma_is_exactly_one() {
        let g = TorusGrid::square(128, 32.0).unwrap();
        let k = make_kernel(&KernelSpec::bargmann_fock(1.0).normalized(), &g).unwrap();
        assert_eq!(k.sigma, 1.0);
        assert_eq!(k.kappa[0], 1.0);
        assert!((k.l2_norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kernel_invariants_hold() {
        for k in [bf(32, 16.0), bf(64, 20.0)] {
            assert!((k.sigma * k.sigma - k.kappa[0]).abs() <= 1e-10 * k.kappa[0]);
            assert!((k.l2_norm.powi(2) - k.sigma.powi(2)).abs() <= 1e-10 * k.kappa[0]);
            let max_abs = k.kappa.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max_abs <= k.l2_norm.powi(2) + 1e-9);
            let g = k.grid;
            for i in 0..g.len() {
                let c = g.coords(i);
                let j = g.index(&[(g.n() - c[0]) % g.n(), (g.n() - c[1]) % g.n()]);
                assert!((k.kappa[i] - k.kappa[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_inside_torus_matches_untruncated() {
        let g = TorusGrid::square(64, 32.0).unwrap();
        let spec = KernelSpec::bargmann_fock(1.0).with_cutoff(12.0);
        let vals = tabulate(&spec, &g).unwrap();
        for (i, v) in vals.iter().enumerate() {
            let x = g.displacement(i);
            let r2 = x[0] * x[0] + x[1] * x[1];
            let expect = if r2.sqrt() <= 6.0 { (-r2).exp() } else { *v };
            assert_eq!(*v, expect, "cell {i}");
        }
        // the cutoff band only touches values below exp(-36)
        assert!(vals.iter().zip(tabulate(&KernelSpec::bargmann_fock(1.0), &g).unwrap()).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn resolution_and_zero_errors() {
        let coarse = TorusGrid::square(16, 64.0).unwrap();
        assert!(matches!(
            make_kernel(&KernelSpec::bargmann_fock(1.0), &coarse),
            Err(Error::KernelUnderresolved { .. })
        ));
        let g = TorusGrid::square(8, 8.0).unwrap();
        assert_eq!(make_kernel(&KernelSpec::constant(0.0), &g).unwrap_err(), Error::ZeroKernel);
        let bad = KernelSpec::new(KernelFamily::TruncatedPolynomialDecay { width: 1.0, beta: 1.5 });
        assert!(matches!(bad.validate(), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn alpha_is_scale_invariant() {
        let k = bf(64, 32.0);
        let k2 = k.scaled(3.5).unwrap();
        assert!((k.alpha - k2.alpha).abs() < 1e-12);
    }

    #[test]
    fn bargmann_fock_passes_all_conditions() {
        let k = bf(128, 32.0);
        let r = validate_conditions(&k, &Tolerances::default());
        assert!(r.weak_positivity.pass && r.strong_positivity.pass, "{r:?}");
        assert!(r.symmetry.pass && r.decay.pass && r.nondegeneracy.pass, "{r:?}");
        assert_eq!(r, validate_conditions(&k, &Tolerances::default()));
    }

    #[test]
    fn odd_kernel_fails_symmetry() {
        let g = TorusGrid::square(64, 16.0).unwrap();
        let values = (0..g.len())
            .map(|i| {
                let x = g.displacement(i);
                x[0] * (-(x[0] * x[0] + x[1] * x[1])).exp()
            })
            .collect();
        let spec = KernelSpec::new(KernelFamily::CustomTable { n: 64, values });
        let k = make_kernel(&spec, &g).unwrap();
        let r = validate_conditions(&k, &Tolerances::default());
        assert!(!r.symmetry.pass);
        assert!(!r.strong_positivity.pass);
        assert!(r.required_failures().contains(&"symmetry"));
    }

    #[test]
    fn polynomial_decay_exponent_is_recovered() {
        let g = TorusGrid::square(256, 256.0).unwrap();
        let spec = KernelSpec::new(KernelFamily::TruncatedPolynomialDecay { width: 2.0, beta: 3.0 });
        let k = make_kernel(&spec, &g).unwrap();
        let r = validate_conditions(&k, &Tolerances::default());
        assert!((r.decay.fitted_beta - 3.0).abs() < 0.1, "{}", r.decay.fitted_beta);
    }

    #[test]
    fn constant_kernel_is_degenerate() {
        let g = TorusGrid::square(8, 8.0).unwrap();
        let r = validate_conditions(&make_kernel(&KernelSpec::constant(1.0), &g).unwrap(), &Tolerances::default());
        assert!(!r.nondegeneracy.pass);
    }
}
