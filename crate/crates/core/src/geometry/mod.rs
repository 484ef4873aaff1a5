//! Bounded convex planar domains and the geometric queries built on them.

mod domain;
mod file;
mod point;

pub use domain::{Containment, ConvexDomain, DomainKind, CONTAINMENT_TOL, DEFAULT_RESOLUTION};
pub use file::DomainSpec;
pub use point::{Direction, Point};
