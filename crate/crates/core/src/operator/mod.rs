//! Monotone discretization of `b(x, t) (det D²u)^p` for convex `u`.
//!
//! The determinant is approximated by the minimum, over a set of orthogonal
//! lattice frames, of the product of clamped normalized second differences.
//! Each frame product is nondecreasing in the neighbor values and
//! nonincreasing in the center value, and so is their minimum, which makes the
//! forward-Euler update monotone under the step restriction computed from
//! [`NodeEval::slope`].

mod centered;
mod ma;
mod reduced;
mod stencil;

pub use centered::{centered_det, centered_hessian};
pub use ma::{gcf_value, ma_value, MaOperator, OperatorConfig, Variant};
pub use reduced::{reduced_det_centered, reduced_ma_value, ReducedMaOperator};
pub use stencil::{CompiledFrames, Frame, StencilDir, StencilSet};

/// Operator value at a node with its Lipschitz surrogate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEval {
    pub value: f64,
    /// Bound on `h² · |∂value/∂u(x)|`; the explicit step is monotone when
    /// `dt · slope <= h²`.
    pub slope: f64,
}

/// A spatial right-hand side evaluated node by node on a frozen state.
pub trait SpatialOperator: Send + Sync {
    /// Value and slope at `node` given the full value vector at time `t`.
    ///
    /// Second differences below `floor` are raised to `floor` when computing
    /// the slope of a sublinear power (`p < 1`), where the true derivative is
    /// unbounded near degenerate directions.
    fn evaluate(&self, u: &[f64], node: usize, t: f64, floor: f64) -> NodeEval;

    /// Hook run after every update, e.g. to refresh mirror ghost nodes.
    fn after_update(&self, _u: &mut [f64]) {}
}

/// Partial derivative weight `p · P^p / d_e` of `P^p` with respect to the
/// factor `d_e`, where `P = Π d`; computed without division for `p >= 1`.
#[inline]
pub(crate) fn power_partials(d: &[f64], p: f64, floor: f64, out: &mut [f64]) {
    let m = d.len();
    if p >= 1.0 {
        let prod: f64 = d.iter().product();
        for e in 0..m {
            let others: f64 = (0..m).filter(|&f| f != e).map(|f| d[f]).product();
            out[e] = p * prod.powf(p - 1.0) * others;
        }
    } else {
        let prod: f64 = d.iter().map(|v| v.max(floor)).product();
        let pp = prod.powf(p);
        for e in 0..m {
            out[e] = p * pp / d[e].max(floor);
        }
    }
}
