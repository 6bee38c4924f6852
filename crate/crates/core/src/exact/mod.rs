//! Exact solutions: quadratics, comparison barriers and the self-similar
//! solution with a persisting edge.

mod barrier;
mod gstar;
mod profile;

pub use barrier::{Barrier, BarrierKind};
pub use gstar::{exponent_q, solve_gstar, solve_gstar_from_depth, GStar};
pub use profile::{
    beta, build_profile, build_profile_with_samples, phi_equation_log_residual, profile_residual, solve_c, ProfileResidual, SelfSimilarProfile,
};
