//! Threshold maps, event evaluation, duality and Morse diagnostics on the site lattice.

mod duality;
pub(crate) mod events;
mod morse;
mod sweep;
mod union_find;

pub use duality::{duality_classify, hermite_basis, positive_windings, DualityCase, DualityKind};
pub use events::{evaluate_event, rotate, Connectivity, EventKind, EventSpec, Placement, Region};
pub use morse::{morse_report, MorseReport, LINK};
pub use sweep::{saddle_derivative_check, threshold_sweep, DerivativeRow, Realization, ThresholdEngine, ThresholdResult};
pub use union_find::{Class, PeriodicUnionFind, UnionOutcome, ZERO_CLASS};
