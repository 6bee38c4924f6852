use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction};

/// Parabolic rescaling `v(x, t) = u(Ax, m t) / h` with
/// `m = |det A|^(2p) / h^(np − 1)`, under which `v` solves the same equation
/// with coefficient `b(Ax, mt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingMap {
    a: DMatrix<f64>,
    height: f64,
    time_factor: f64,
    p: f64,
}

impl ScalingMap {
    pub fn new(a: DMatrix<f64>, height: f64, p: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument("scaling map must be square".into()));
        }
        let det = a.determinant();
        if !(det.abs() > 1e-14) {
            return Err(Error::InvalidArgument(format!("scaling map is singular (det = {det})")));
        }
        if !(height > 0.0 && p > 0.0) {
            return Err(Error::InvalidArgument("need h > 0 and p > 0".into()));
        }
        let n = a.nrows() as f64;
        let time_factor = det.abs().powf(2.0 * p) / height.powf(n * p - 1.0);
        Ok(Self { a, height, time_factor, p })
    }

    pub fn identity(n: usize, p: f64) -> Self {
        Self { a: DMatrix::identity(n, n), height: 1.0, time_factor: 1.0, p }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// `m`.
    pub fn time_factor(&self) -> f64 {
        self.time_factor
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.a.nrows()).map(|i| (0..self.a.ncols()).map(|j| self.a[(i, j)] * x[j]).sum()).collect()
    }

    /// Source time `m t` of target time `t`.
    pub fn source_time(&self, t: f64) -> f64 {
        self.time_factor * t
    }
}

/// Rescales each snapshot onto `target`: a source snapshot at time `s` becomes
/// the target snapshot at `s / m`, values by multilinear interpolation.
pub fn rescale(snapshots: &[GridFunction], map: &ScalingMap, target: &Arc<Domain>) -> Result<Vec<GridFunction>> {
    let mut out = Vec::with_capacity(snapshots.len());
    let mut x = vec![0.0; target.dim()];
    for u in snapshots {
        if u.domain().dim() != target.dim() || map.matrix().nrows() != target.dim() {
            return Err(Error::InvalidArgument("dimension mismatch in rescale".into()));
        }
        let mut values = vec![f64::NAN; target.len()];
        for i in target.active_nodes() {
            target.coords_into(i, &mut x);
            let y = map.apply(&x);
            let v = u.interpolate(&y).ok_or_else(|| Error::OutsideSource { location: x.clone() })?;
            values[i] = v / map.height();
        }
        out.push(GridFunction::from_values(Arc::clone(target), values, u.time() / map.time_factor())?);
    }
    Ok(out)
}
