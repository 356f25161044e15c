//! Exact polytopes inside the probability simplex.

pub mod linalg;
pub mod lp;
mod polytope;

pub use polytope::{point_on_segment_with_value, DualCertificate, Halfspace, Polytope};
