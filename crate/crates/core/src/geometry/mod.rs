//! Convex-geometry diagnostics of sampled convex functions: sections and
//! centered sections, maximal inscribed (John) ellipsoids, balancedness
//! certificates, discrete Legendre transforms and contact sets.

mod ellipsoid;
mod flat;
mod hull;
mod legendre;
mod section;

pub use ellipsoid::{balancedness, john_ellipsoid, perturbation_check, unit_ball_volume, BalancednessCertificate, Ellipsoid};
pub use flat::{flat_set, FlatSet};
pub use hull::{convex_hull_2d, diameter, extremal_points, sample_directions, support, TOL_COLLINEAR};
pub use legendre::{legendre, legendre_1d, slope_box};
pub use section::{
    centered_section, section_at, Section, CENTERING_DAMPING, CENTERING_MAX_ITER, TOL_SECTION_RELATIVE,
};
