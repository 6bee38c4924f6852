//! A numerical laboratory for the degenerate parabolic Monge-Ampère equation
//!
//! ```text
//! u_t = b(x, t) (det D²u)^p,   λ <= b <= Λ,
//! ```
//!
//! for functions convex in `x` and nondecreasing in `t`.
//!
//! Modules, bottom-up:
//!
//! - [`grid`]: lattices over convex domains, sampled functions, CSV node tables.
//! - [`geometry`]: sections, centered sections, John ellipsoids, balancedness,
//!   discrete Legendre transforms and contact (flat) sets.
//! - [`operator`]: the monotone wide-stencil discretization of `(det D²u)^p`,
//!   its Gauss-curvature-flow variant and the axisymmetric reduced form.
//! - [`evolution`]: explicit monotone time stepping, the parabolic scaling map
//!   and discrete comparison checks.
//! - [`exact`]: quadratic solutions, barriers and the self-similar solution
//!   whose edge persists.
//! - [`analysis`]: angle sets, exponent fits, separation and flat-set probes.
//! - [`experiments`]: the experiment registry used by the CLI and the
//!   acceptance suite.

pub mod analysis;
pub mod config;
mod error;
pub mod evolution;
pub mod exact;
pub mod experiments;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod operator;

pub use error::{Error, Result};
