//! Hilbert-metric geometry and a numerical toolkit for the singular
//! quasilinear problem
//!
//! ```text
//! div(a(|∇w|) ∇w) + F(|∇w|) / w = 0   in Ω,    w > 0,    w = 0 on ∂Ω
//! ```
//!
//! on bounded convex planar domains.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod hilbert;
pub mod profile;
pub mod quadrature;
pub mod sector;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{Containment, ConvexDomain, Direction, DomainKind, DomainSpec, Point};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
