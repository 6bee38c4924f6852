//! Axisymmetric reduced form in `(r, y)` with `r = |x'|`, `y = x_n`:
//!
//! ```text
//! det D²u = (ũ_r / r)^(n−2) (ũ_rr ũ_yy − ũ_ry²)
//! ```
//!
//! The planar factor uses the monotone min-frame rule; `ũ_r / r` uses the
//! one-sided difference `(ũ(r+h) − ũ(r)) / (h (r + h/2))`, which is monotone and
//! exact on quadratics, and its limit `ũ_rr` on the axis.

use std::sync::Arc;

use super::ma::OperatorConfig;
use super::stencil::{CompiledFrames, StencilSet};
use super::{power_partials, NodeEval, SpatialOperator};
use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction};

#[derive(Debug, Clone)]
pub struct ReducedMaOperator {
    config: OperatorConfig,
    n: usize,
    domain: Arc<Domain>,
    frames: CompiledFrames,
    r_offset: isize,
    axis_r: usize,
}

impl ReducedMaOperator {
    /// `domain` must be a 2-D axisymmetric lattice (mirror axis 0); `n >= 3`.
    pub fn new(config: OperatorConfig, n: usize, domain: Arc<Domain>) -> Result<Self> {
        if domain.dim() != 2 || domain.mirror_axis() != Some(0) {
            return Err(Error::InvalidArgument("reduced operator needs an axisymmetric (r, y) domain".into()));
        }
        if !(3..=4).contains(&n) {
            return Err(Error::InvalidArgument(format!("reduced operator needs n in 3..=4, got {n}")));
        }
        let frames = StencilSet::new(2, config.width)?.compile(&domain)?;
        let r_offset = domain.offset(&[1, 0]);
        let axis_r = domain.width();
        Ok(Self { config, n, domain, frames, r_offset, axis_r })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    fn radius(&self, node: usize) -> f64 {
        let k = node % self.domain.counts()[0];
        (k as f64 - self.axis_r as f64) * self.domain.spacing()
    }

    /// `ũ_r / r` (clamped at 0) and its weight `h² ∂/∂u(x)`.
    fn radial_ratio(&self, u: &[f64], node: usize) -> (f64, f64) {
        let h = self.domain.spacing();
        let r = self.radius(node);
        let c = u[node];
        let fwd = u[(node as isize + self.r_offset) as usize];
        if r.abs() < 0.5 * h {
            let back = u[(node as isize - self.r_offset) as usize];
            (((fwd + back - 2.0 * c) / (h * h)).max(0.0), 2.0)
        } else {
            (((fwd - c) / (h * (r + 0.5 * h))).max(0.0), h / (r + 0.5 * h))
        }
    }

    pub fn value(&self, u: &GridFunction, node: usize) -> f64 {
        self.evaluate(u.values(), node, u.time(), 0.0).value
    }
}

impl SpatialOperator for ReducedMaOperator {
    fn evaluate(&self, u: &[f64], node: usize, t: f64, floor: f64) -> NodeEval {
        let p = self.config.p;
        let m = self.n - 2;
        let (q, q_weight) = self.radial_ratio(u, node);
        let mut factors = [0.0f64; 4];
        let mut partial = [0.0f64; 4];
        for f in factors.iter_mut().take(m) {
            *f = q;
        }
        let mut best = f64::INFINITY;
        let mut slope: f64 = 0.0;
        for frame in &self.frames.frames {
            factors[m] = CompiledFrames::second_difference(u, node, &frame[0]).max(0.0);
            factors[m + 1] = CompiledFrames::second_difference(u, node, &frame[1]).max(0.0);
            best = best.min(factors[m] * factors[m + 1]);
            power_partials(&factors[..m + 2], p, floor, &mut partial[..m + 2]);
            let s = partial[..m].iter().sum::<f64>() * q_weight
                + 2.0 / frame[0].len2 * partial[m]
                + 2.0 / frame[1].len2 * partial[m + 1];
            slope = slope.max(s);
        }
        let b = match self.config.coefficient.constant_value() {
            Some(b) => b,
            None => {
                let x = self.domain.coords(node);
                let mut full = vec![0.0; self.n];
                full[0] = x[0].abs();
                full[self.n - 1] = x[1];
                self.config.coefficient.eval(&full, t)
            }
        };
        NodeEval { value: b * (q.powi(m as i32) * best).powf(p), slope: b * slope }
    }

    fn after_update(&self, u: &mut [f64]) {
        for &g in self.domain.band() {
            if let Some(pair) = self.domain.mirror_partner(g) {
                u[g] = u[pair];
            }
        }
    }
}

/// Reduced monotone value at one node of an `(r, y)` grid function.
pub fn reduced_ma_value(u: &GridFunction, node: usize, n: usize, config: &OperatorConfig) -> Result<f64> {
    let r = u.domain().coords(node)[0];
    if r < -1e-12 {
        return Err(Error::InvalidArgument(format!("negative radius {r}")));
    }
    let op = ReducedMaOperator::new(config.clone(), n, Arc::clone(u.domain()))?;
    Ok(op.value(u, node))
}

/// Consistent (non-monotone) reduced determinant from centered differences,
/// second order in `h` for smooth `ũ` and `r` bounded away from 0.
pub fn reduced_det_centered(u: &GridFunction, node: usize, n: usize) -> Result<f64> {
    let d = u.domain();
    if d.dim() != 2 {
        return Err(Error::InvalidArgument("reduced determinant needs a 2-D grid".into()));
    }
    let x = d.coords(node);
    if x[0] < -1e-12 {
        return Err(Error::InvalidArgument(format!("negative radius {}", x[0])));
    }
    let h = d.spacing();
    let at = |dr: i32, dy: i32| -> Result<f64> {
        let j = d
            .neighbor(node, &[dr, dy])
            .filter(|&j| d.is_active(j))
            .ok_or_else(|| Error::OutOfRange(format!("stencil leaves the grid at {x:?}")))?;
        Ok(u.value(j))
    };
    let c = u.value(node);
    let (rp, rm, yp, ym) = (at(1, 0)?, at(-1, 0)?, at(0, 1)?, at(0, -1)?);
    let u_rr = (rp + rm - 2.0 * c) / (h * h);
    let u_yy = (yp + ym - 2.0 * c) / (h * h);
    let u_ry = (at(1, 1)? - at(1, -1)? - at(-1, 1)? + at(-1, -1)?) / (4.0 * h * h);
    let ratio = if x[0] < 0.5 * h { u_rr } else { (rp - rm) / (2.0 * h * x[0]) };
    Ok(ratio.powi(n as i32 - 2) * (u_rr * u_yy - u_ry * u_ry))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reduced_grid(f: impl Fn(f64, f64) -> f64) -> GridFunction {
        let d = Arc::new(Domain::axisymmetric(1.0, -1.0, 1.0, 0.05, 1).unwrap());
        let mut u = crate::grid::sample(&d, 0.0, |x| f(x[0].abs(), x[1])).unwrap();
        u.apply_mirror();
        u
    }

    #[test]
    fn quadratic_gives_one() {
        let u = reduced_grid(|r, y| 0.5 * (r * r + y * y));
        let cfg = OperatorConfig::unit(1.0, 1).unwrap();
        let d = u.domain().clone();
        for &i in d.interior() {
            let v = reduced_ma_value(&u, i, 4, &cfg).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "{v} at {:?}", d.coords(i));
            assert!((reduced_det_centered(&u, i, 4).unwrap_or(1.0) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_direction_gives_zero() {
        let u = reduced_grid(|r, _| 0.5 * r * r);
        let cfg = OperatorConfig::unit(1.0, 1).unwrap();
        for &i in u.domain().interior() {
            assert_eq!(reduced_ma_value(&u, i, 3, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn reduced_matches_full_on_radial_quartic() {
        // ũ = r⁴/4 + y²/2 in n = 3: det D²u = (r²)(3r²)(1) = 3r⁴
        let u = reduced_grid(|r, y| 0.25 * r.powi(4) + 0.5 * y * y);
        let d = u.domain().clone();
        let i = d.nearest_node(&[0.5, 0.0]).unwrap();
        let v = reduced_det_centered(&u, i, 3).unwrap();
        assert!((v - 3.0 * 0.5f64.powi(4)).abs() < 1e-2, "{v}");
    }
}
