//! P1 Galerkin solver for the relaxed problem `w = ε` on `∂Ω`, continuation
//! in `ε`, and a finite-volume radial solver for the disk.

mod fem;
mod mesh;
mod radial;
mod relaxed;
mod sparse;

pub use fem::{triangle_gradients, IterationRecord, ModifiedCoefficients, StepKind};
pub use mesh::{mesh_domain, BoundaryFocus, Grading, Mesh};
pub use radial::{radial_solve_disk, RadialSolution};
pub use relaxed::{
    continuation_solve, default_schedule, gradient_cap, gradient_cap_check, residual_norm, solve_relaxed,
    solve_relaxed_from, ContinuationResult, GradientCapReport, ScalarField, SolveOptions, StageReport,
};
pub use sparse::{minimum_degree, CsrMatrix, SparseLu, SymbolicLu};
