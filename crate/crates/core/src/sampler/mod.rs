//! White-noise field synthesis and its diagnostics.

mod diagnostics;
mod field;
mod noise;

pub use diagnostics::{
    approximation_error_scan, coarsen_noise, estimate_covariance, estimate_covariance_at, sup_norm_diagnostic, ApproximationRow,
    CovarianceEstimate, SupNormDiagnostic,
};
pub use field::{convolve_field, direct_convolution, draw_field, draw_field_indexed, FieldSample, Route};
pub use noise::{draw_white_noise, sample_seed, WhiteNoiseEps};
