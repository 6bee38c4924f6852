//! Quantitative diagnostics of computed solutions: angle sets and `C^{1,α}`
//! exponents along lines, Hölder-in-time fits, separation from zero,
//! contact-set dichotomy checks and interface growth exponents, with CSV and
//! plot-script emission.

mod angle;
mod fit;
mod interface;
mod probes;
pub mod report;

pub use angle::{
    angle_opening, angle_opening_from, angle_set_contains, c1alpha_exponent, c1alpha_exponent_at, AngleCertificate,
    C1AlphaEstimate, LineSamples, CORNER_RATIO, TOL_LINE_CONVEX,
};
pub use fit::{geometric_range, ExponentFit, FIT_MIN_DECADES, FIT_MIN_POINTS};
pub use interface::{interface_exponent, InterfaceFit, BIN_GROWTH, BIN_START, MIN_BINS};
pub use probes::{
    default_separation_eps, flat_dichotomy_probe, holder_time_fit, separation_probe, Crossing, DichotomyOutcome,
    DichotomyReport, SeparationReport, HOLDER_MIN_SNAPSHOTS, MIN_INCREMENT,
};
