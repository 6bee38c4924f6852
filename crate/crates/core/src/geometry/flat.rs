use crate::error::{Error, Result};
use crate::grid::GridFunction;

use super::hull::{diameter, extremal_points};

/// Contact set `D = {u <= l + tol}` of a supporting affine function `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSet {
    /// Active member nodes, ascending.
    pub nodes: Vec<usize>,
    /// Extremal members (node indices).
    pub extremal: Vec<usize>,
    pub diameter: f64,
    /// The hull of `D` has diameter at least `3 h_grid`.
    pub contains_segment: bool,
}

/// Contact set of `u` with `l(x) = a·x + c`. Fails with `NotTangent` if
/// `u < l − tol` somewhere.
pub fn flat_set(u: &GridFunction, a: &[f64], c: f64, tol: f64) -> Result<FlatSet> {
    let d = u.domain();
    if a.len() != d.dim() {
        return Err(Error::InvalidArgument("affine slope dimension mismatch".into()));
    }
    let mut x = vec![0.0; d.dim()];
    let mut worst = f64::INFINITY;
    let mut nodes = Vec::new();
    for i in d.active_nodes() {
        d.coords_into(i, &mut x);
        let gap = u.value(i) - x.iter().zip(a).map(|(p, q)| p * q).sum::<f64>() - c;
        worst = worst.min(gap);
        if gap <= tol {
            nodes.push(i);
        }
    }
    if worst < -tol {
        return Err(Error::NotTangent { worst });
    }
    nodes.sort_unstable();
    let pts: Vec<Vec<f64>> = nodes.iter().map(|&i| d.coords(i)).collect();
    let ext = extremal_points(&pts);
    let diam = diameter(&pts, &ext);
    Ok(FlatSet {
        extremal: ext.iter().map(|&k| nodes[k]).collect(),
        nodes,
        diameter: diam,
        contains_segment: diam >= 3.0 * d.spacing(),
    })
}
