//! Percolation of excursion sets of Gaussian fields `f = q * W` on a flat torus.
//!
//! The pipeline is: tabulate a kernel ([`kernel`]), draw discrete white noise and convolve
//! ([`sampler`]), compute topological thresholds by a sweep with a homology-tracking
//! union-find ([`topology`]), and aggregate Monte Carlo checks ([`experiments`]).

pub mod error;
pub mod experiments;
pub mod fft;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod rng;
pub mod sampler;
pub mod topology;

pub use error::{Error, Result};
pub use experiments::{BoundCheck, Estimate, McConfig, McResult};
pub use grid::TorusGrid;
pub use kernel::{alpha, make_kernel, validate_conditions, ConditionReport, Kernel, KernelFamily, KernelSpec, Tolerances};
pub use sampler::{draw_field, draw_field_indexed, draw_white_noise, FieldSample, Route, WhiteNoiseEps};
pub use topology::{threshold_sweep, Connectivity, EventKind, EventSpec, ThresholdEngine, ThresholdResult};

/// Version stamped into every artifact.
pub const ARTIFACT_VERSION: &str = concat!("gfperc ", env!("CARGO_PKG_VERSION"));
