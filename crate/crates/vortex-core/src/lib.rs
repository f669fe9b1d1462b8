//! Equivariant vortex solutions of a two-component Ginzburg-Landau system
//! on a disk, and the spectral analysis of their second variation.
//!
//! The energy under study is
//!
//! ```text
//! E[psi+, psi-] = ∫_D |∇psi+|² + |∇psi-|²
//!     + (λ/2) [ A+ (|psi+|²-t+²)² + A- (|psi-|²-t-²)²
//!               + 2B (|psi+|²-t+²)(|psi-|²-t-²) ] dx
//! ```
//!
//! on the unit disk with degree-one boundary data `psi± = t± e^{iθ}`.
//! The crate provides:
//!
//! - parameter handling, admissibility checks and the map from
//!   two-species condensate constants to the reduced parameters
//!   ([`model`]);
//! - cell-centered radial grids and banded operator assembly with a
//!   robust generalized eigensolver ([`grid`]);
//! - a damped-Newton solver for the coupled radial profile equations,
//!   energy evaluation and far-field asymptotics ([`profile`]);
//! - assembly of the angular-mode blocks of the second variation and
//!   the associated quadratic-form identities ([`spectral`]);
//! - stability classification over the coupling/scale plane, including
//!   the location of the instability threshold in λ ([`stability`]).
//!
//! Two equivalent frames are used throughout. On the unit disk the
//! potential carries the factor λ; rescaling `r -> r√λ` moves the
//! problem to the disk of radius `R = √λ` with unit potential factor.
//! Eigenvalues transport between frames as `μ_unit = R² μ_rescaled`,
//! and the solvers here exploit that identity rather than resolving
//! the boundary layer on the unit disk.

#![warn(missing_docs)]
#![allow(clippy::needless_range_loop)] // indexed loops read better in stencil code
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN; `x <= 0.0` lets it through
#![allow(clippy::type_complexity)] // multi-array returns are the natural shape of assembly code
#![allow(clippy::too_many_arguments)] // internal assembly helpers take the full coefficient list

pub mod bessel;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod profile;
pub mod reference;
pub mod spectral;
pub mod stability;

/// Complex scalar used by the test-field and complex-block APIs.
pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use grid::{BlockOperator, EigenPair, RadialGrid};
pub use model::{BecParams, BoundReport, GlParams};
pub use profile::{
    AsymptoticCoeffs, FieldMode, InitialGuess, MonotonicityReport, Profile, SolveOptions,
    TestField,
};
pub use spectral::{
    BlockId, BlockSpectrum, ComplexBlockVector, FkPair, SimplicityReport, SpectralVector,
    TildeResidual,
};
pub use stability::{
    Classification, LambdaStarResult, MuEqualReport, StabilityReport, SweepEntry,
    ThresholdStatus, TracePoint,
};
