//! Coefficient pairs `(a, F)`, the functions `G` and `H = G⁻¹`, the
//! one-dimensional profile `W`, and the barrier functions built from it.

mod barriers;
mod coeffs;
mod gtable;
mod hermite;
mod profile1d;

pub use barriers::{
    lower_barrier, lower_barrier_eps, relaxed_upper_barrier, upper_barrier, LowerBarrier, RelaxedSlab,
    RelaxedUpperBarrier, SlabFamily, UpperBarrier, DEFAULT_DIRECTIONS,
};
pub use coeffs::{CoefficientFamily, PiecewisePolynomial, ScalarFn, TailDiagnostic, TailPanel, FD_STEP};
pub use gtable::{build_g, GTable};
pub use profile1d::{gradient_bound, solve_profile_w, Profile1D, ProfileOptions, ProfilePoint};
