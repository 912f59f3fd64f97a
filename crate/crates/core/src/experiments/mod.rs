//! Monte Carlo harnesses for the probabilistic statements and the per-sample inclusion audits.
//!
//! Every experiment draws sample `i` from `sample_seed(master_seed, i)` and reduces in sample
//! order, so results do not depend on the thread count.

mod audit;
mod crossing;
mod fkg;
mod loops;
mod mc;
pub mod stats;
mod variance;

pub use audit::{implication_audit, phi_psi, AuditFault, AuditGeometry, AuditParams, AuditResult, SampleAudit, Variant};
pub use crossing::{circuit_scan, crossing_curve, decreasing_within_se, increasing_within_se, Curve, CurveRow};
pub use fkg::{fkg_test, FkgResult};
pub use loops::{chebyshev_bound, concentration_tail_test, quarter_bound_test, QuarterBound, TailRow, TailTest};
pub use mc::{digest_f64s, map_samples, McConfig, McResult, MIN_CI_SAMPLES};
pub use stats::{BoundCheck, Estimate, SE_MULTIPLIER};
pub use variance::{variance_scan, VarianceRow, VarianceScan};
