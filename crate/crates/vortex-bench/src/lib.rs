//! Shared fixtures for the benchmark targets: one standard parameter
//! set and a pre-solved profile, so each bench measures a single
//! pipeline stage instead of everything upstream of it.

use vortex_core::model::balanced;
use vortex_core::profile::solve_profile;
use vortex_core::{GlParams, Profile, SolveOptions};

/// The balanced positive-coupling parameter set used across the
/// benchmarks: `a± = 1`, `t±² = 1/2`, `b = 0.3`.
pub fn standard_params() -> GlParams {
    balanced(1.0, std::f64::consts::FRAC_1_SQRT_2, 0.3)
}

/// Solve the standard profile on `[0, radius]` with `n_cells` cells.
pub fn solved_profile(radius: f64, n_cells: usize) -> Profile {
    solve_profile(&standard_params(), radius, n_cells, &SolveOptions::default())
        .expect("benchmark profile solves")
}
