//! Fixtures shared by the pipeline benchmarks.

use gfperc_core::{draw_field, make_kernel, FieldSample, Kernel, KernelSpec, Route, TorusGrid};

/// Unit-sigma Bargmann-Fock kernel on an `n x n` grid of spacing 1/2.
pub fn desk_kernel(n: usize) -> Kernel {
    let grid = TorusGrid::square(n, n as f64 / 2.0).expect("valid grid");
    make_kernel(&KernelSpec::bargmann_fock(1.0).normalized(), &grid).expect("resolved kernel")
}

pub fn desk_field(n: usize, seed: u64) -> FieldSample {
    draw_field(&desk_kernel(n), seed, Route::WhiteNoise).expect("field draws")
}
