//! Lattice representation of convex spatial domains and of scalar functions
//! sampled on them.
//!
//! A [`Domain`] is a uniform lattice over an axis-aligned box, padded by the
//! stencil width, whose nodes are split into interior, boundary-band and
//! exterior classes. Band nodes are exactly the non-interior nodes an interior
//! stencil can reach, so every operator evaluation at an interior node reads
//! defined values.

mod coefficient;
pub mod csv;
mod domain;
mod function;
mod shape;

pub use coefficient::CoefficientField;
pub use domain::{build_domain, Domain, NodeClass};
pub use function::{
    class_counts, discrete_convexity_check, lattice_directions, sample, ConvexityReport, GridFunction,
    TOL_CONVEX_RELATIVE,
};
pub use shape::{HalfSpace, Shape};
