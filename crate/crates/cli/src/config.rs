//! TOML run configuration. Every table rejects unknown keys.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use gfperc_core::experiments::AuditParams;
use gfperc_core::{Connectivity, EventKind, EventSpec, KernelFamily, KernelSpec, McConfig, Route};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_out")]
    pub out: String,
    /// Worker threads; absent means all available cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub kernel: KernelConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventConfig>,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

fn default_samples() -> usize {
    1000
}

fn default_out() -> String {
    "gfperc-out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_cut: Option<f64>,
    #[serde(default)]
    pub normalize_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_d")]
    pub d: usize,
    pub n: usize,
    pub side: f64,
}

fn default_d() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    #[serde(default)]
    pub route: Route,
    #[serde(default)]
    pub connectivity: Connectivity,
    #[serde(default = "default_side_factor")]
    pub side_factor: f64,
    /// Event scale `R`; defaults to `side / side_factor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

fn default_side_factor() -> f64 {
    10.0
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { route: Route::default(), connectivity: Connectivity::default(), side_factor: 10.0, scale: None }
    }
}

/// One event. Lengths are physical; `scale` defaults to the run's `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    /// `loop`, `cross`, `cross_dagger` or `circuit`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    #[serde(default)]
    pub origin: [f64; 2],
    #[serde(default)]
    pub rotation: u8,
}

/// Per-experiment parameters; each experiment reads only its own keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// variance-scan: torus sides at the configured spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<f64>>,
    /// tails: level multiples of sigma.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    /// crossing-curve: scales `R`; circuit-scan: inner radii `r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_list: Option<Vec<f64>>,
    /// circuit-scan: annulus ratios `L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_list: Option<Vec<f64>>,
    /// crossing-curve, circuit-scan: levels `l` in field units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    /// fkg: the level at which both events are evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_a: Option<EventConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_b: Option<EventConfig>,
    /// audit levels and gluing ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loop_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glue_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glue_l: Option<usize>,
}

/// Experiment names accepted by `gfperc experiment`.
pub const EXPERIMENTS: [&str; 7] =
    ["variance-scan", "quarter-bound", "tails", "crossing-curve", "fkg", "audit", "circuit-scan"];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Resolved config without `out` and `jobs`, which never affect results.
    pub fn portable(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("run config serializes");
        let map = v.as_object_mut().expect("table");
        map.remove("out");
        map.remove("jobs");
        v
    }

    /// SHA-256 of the portable config in TOML form.
    pub fn digest(&self) -> String {
        let text = toml::to_string(&self.portable()).expect("portable config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec, CliError> {
        let k = &self.kernel;
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| CliError::Config(format!("kernel family {} needs `{name}`", k.family)))
        };
        let allowed: &[&str] = match k.family.as_str() {
            "bargmann_fock" => &["width"],
            "oscillatory" => &["width", "a"],
            "truncated_polynomial_decay" => &["width", "beta"],
            "constant" => &["value"],
            "custom_table" => &["values"],
            other => return Err(CliError::Config(format!("unknown kernel family {other:?}"))),
        };
        let present = [
            ("width", k.width.is_some()),
            ("a", k.a.is_some()),
            ("beta", k.beta.is_some()),
            ("value", k.value.is_some()),
            ("values", k.values.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(CliError::Config(format!("kernel family {} does not take `{name}`", k.family)));
            }
        }
        let family = match k.family.as_str() {
            "bargmann_fock" => KernelFamily::BargmannFock { width: need("width", k.width)? },
            "oscillatory" => KernelFamily::Oscillatory { width: need("width", k.width)?, a: need("a", k.a)? },
            "truncated_polynomial_decay" => {
                KernelFamily::TruncatedPolynomialDecay { width: need("width", k.width)?, beta: need("beta", k.beta)? }
            }
            "constant" => KernelFamily::Constant { value: need("value", k.value)? },
            _ => KernelFamily::CustomTable {
                n: self.grid.n,
                values: k.values.clone().ok_or_else(|| CliError::Config("custom_table needs `values`".into()))?,
            },
        };
        let spec = KernelSpec { family, r_cut: k.r_cut, normalize_sigma: k.normalize_sigma };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn scale(&self) -> f64 {
        self.monte_carlo.scale.unwrap_or(self.grid.side / self.monte_carlo.side_factor)
    }

    pub fn mc(&self) -> Result<McConfig, CliError> {
        if self.grid.n == 0 || !(self.grid.side.is_finite() && self.grid.side > 0.0) {
            return Err(CliError::Config(format!("grid needs n >= 1 and side > 0, got n = {}, side = {}", self.grid.n, self.grid.side)));
        }
        Ok(McConfig {
            kernel: self.kernel_spec()?,
            d: self.grid.d,
            n: self.grid.n,
            side: self.grid.side,
            side_factor: self.monte_carlo.side_factor,
            scale: self.scale(),
            events: Vec::new(),
            levels: Vec::new(),
            n_samples: self.samples,
            master_seed: self.seed,
            route: self.monte_carlo.route,
            connectivity: self.monte_carlo.connectivity,
        })
    }

    pub fn event(&self, e: &EventConfig) -> Result<EventSpec, CliError> {
        let scale = e.scale.unwrap_or(self.scale());
        let spec = match e.kind.as_str() {
            "loop" => EventSpec::loop_event(e.axis.unwrap_or(0)),
            "cross" => EventSpec::cross(scale),
            "cross_dagger" => EventSpec::cross_dagger(scale),
            "circuit" => {
                let r1 = e.r1.unwrap_or(scale);
                EventSpec::circuit(r1, e.r2.unwrap_or(2.0 * r1))
            }
            other => return Err(CliError::Config(format!("unknown event kind {other:?}"))),
        };
        if let EventKind::Loop { axis } = spec.kind {
            if axis >= self.grid.d {
                return Err(CliError::Config(format!("loop axis {axis} in dimension {}", self.grid.d)));
            }
        }
        Ok(spec.at(e.origin, e.rotation))
    }

    /// Fills the experiment's defaults so that the echoed config pins every parameter.
    pub fn resolve_experiment(&mut self, name: &str) {
        let side = self.grid.side;
        let scale = self.scale();
        let x = &mut self.experiment;
        match name {
            "variance-scan" => {
                x.sides.get_or_insert_with(|| vec![side, 2.0 * side, 4.0 * side]);
            }
            "tails" => {
                x.eps.get_or_insert_with(|| vec![1.0, 2.0]);
            }
            "crossing-curve" => {
                x.r_list.get_or_insert_with(|| vec![scale / 8.0, scale / 4.0, scale / 2.0, scale]);
                x.levels.get_or_insert_with(|| vec![0.2, 0.0, -0.2]);
            }
            "circuit-scan" => {
                x.r_list.get_or_insert_with(|| vec![scale / 4.0]);
                x.l_list.get_or_insert_with(|| vec![2.0, 4.0]);
                x.levels.get_or_insert_with(|| vec![0.3]);
            }
            "fkg" => {
                let dagger = |y: f64| EventConfig {
                    kind: "cross_dagger".into(),
                    axis: None,
                    scale: Some(scale),
                    r1: None,
                    r2: None,
                    origin: [0.0, y],
                    rotation: 0,
                };
                x.level.get_or_insert(0.0);
                x.event_a.get_or_insert_with(|| dagger(0.0));
                x.event_b.get_or_insert_with(|| dagger(4.5 * scale));
            }
            "audit" => {
                let d = AuditParams::default();
                x.loop_level.get_or_insert(d.loop_level);
                x.glue_level.get_or_insert(d.glue_level);
                x.glue_l.get_or_insert(d.glue_l);
            }
            _ => {}
        }
    }
}
