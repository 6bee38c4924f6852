use std::sync::Arc;

use super::domain::{Domain, NodeClass};
use crate::error::{Error, Result};

/// Absolute convexity tolerance per unit of function scale.
pub const TOL_CONVEX_RELATIVE: f64 = 1e-10;

/// Values of `u(·, t)` on the active (interior and band) nodes of a domain.
/// Exterior entries hold NaN.
#[derive(Debug, Clone)]
pub struct GridFunction {
    domain: Arc<Domain>,
    values: Vec<f64>,
    time: f64,
}

impl GridFunction {
    /// Wraps a full-lattice value vector; active entries must be finite.
    pub fn from_values(domain: Arc<Domain>, mut values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "value vector has {} entries, lattice has {}",
                values.len(),
                domain.len()
            )));
        }
        for i in 0..values.len() {
            if domain.is_active(i) {
                if !values[i].is_finite() {
                    return Err(Error::NonFinite { location: domain.coords(i), value: values[i] });
                }
            } else {
                values[i] = f64::NAN;
            }
        }
        Ok(Self { domain, values, time })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    /// Value at the node nearest to `x`.
    pub fn value_near(&self, x: &[f64]) -> Option<f64> {
        let i = self.domain.nearest_node(x)?;
        self.domain.is_active(i).then(|| self.values[i])
    }

    /// Largest absolute active value; the "scale" used by relative tolerances.
    pub fn scale(&self) -> f64 {
        self.domain.active_nodes().map(|i| self.values[i].abs()).fold(0.0, f64::max)
    }

    /// Copies positive-side values onto mirror ghost nodes (axisymmetric domains).
    pub fn apply_mirror(&mut self) {
        if self.domain.mirror_axis().is_none() {
            return;
        }
        let band: Vec<usize> = self.domain.band().to_vec();
        for b in band {
            if let Some(p) = self.domain.mirror_partner(b) {
                self.values[b] = self.values[p];
            }
        }
    }

    /// Multilinear interpolation at `x`; `None` when any cell corner is exterior
    /// or `x` is off the lattice.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        let d = &self.domain;
        let n = d.dim();
        let h = d.spacing();
        let mut base = [0usize; 4];
        let mut frac = [0.0f64; 4];
        for k in 0..n {
            let mut f = (x[k] - d.box_lower()[k]) / h + d.width() as f64;
            // snap round-off so that points on lattice lines only touch their own cells
            if (f - f.round()).abs() < 1e-9 {
                f = f.round();
            }
            if !(f >= 0.0) {
                return None;
            }
            let mut b = f.floor() as usize;
            if b + 1 >= d.counts()[k] {
                // exactly on the last lattice line
                if (f - (d.counts()[k] - 1) as f64).abs() < 1e-9 {
                    b = d.counts()[k] - 2;
                } else {
                    return None;
                }
            }
            base[k] = b;
            frac[k] = f - b as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = 0usize;
            for k in 0..n {
                let bit = (corner >> k) & 1;
                let fk = frac[k];
                w *= if bit == 1 { fk } else { 1.0 - fk };
                idx += (base[k] + bit) * d.strides()[k];
            }
            if w == 0.0 {
                continue;
            }
            if !d.is_active(idx) {
                return None;
            }
            acc += w * self.values[idx];
        }
        Some(acc)
    }
}

/// Samples a closed-form `f(x)` on every active node.
pub fn sample<F>(domain: &Arc<Domain>, t: f64, f: F) -> Result<GridFunction>
where
    F: Fn(&[f64]) -> f64,
{
    let mut values = vec![f64::NAN; domain.len()];
    let mut x = vec![0.0; domain.dim()];
    for i in domain.active_nodes() {
        domain.coords_into(i, &mut x);
        let v = f(&x);
        if !v.is_finite() {
            return Err(Error::NonFinite { location: x.clone(), value: v });
        }
        values[i] = v;
    }
    Ok(GridFunction { domain: Arc::clone(domain), values, time: t })
}

/// Result of [`discrete_convexity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub passed: bool,
    /// Smallest raw second difference `u(x+e) + u(x-e) - 2u(x)` found.
    pub worst: f64,
    pub worst_node: Option<usize>,
    pub worst_direction: Vec<i32>,
    pub tolerance: f64,
}

/// Primitive lattice directions with max-norm at most `width`, one per ± pair.
pub fn lattice_directions(dim: usize, width: usize) -> Vec<Vec<i32>> {
    let w = width as i32;
    let side = (2 * w + 1) as usize;
    let mut out = Vec::new();
    for code in 0..side.pow(dim as u32) {
        let mut r = code;
        let mut v = vec![0i32; dim];
        for c in v.iter_mut() {
            *c = (r % side) as i32 - w;
            r /= side;
        }
        // canonical sign: first nonzero entry positive
        let Some(first) = v.iter().find(|c| **c != 0) else { continue };
        if *first < 0 {
            continue;
        }
        let g = v.iter().fold(0i32, |g, &c| gcd(g, c.abs()));
        if g != 1 {
            continue;
        }
        out.push(v);
    }
    out
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Minimum centered second difference over interior nodes and all stencil
/// directions; passes iff it is at least `-tol_convex`.
pub fn discrete_convexity_check(u: &GridFunction) -> ConvexityReport {
    let d = u.domain();
    let dirs = lattice_directions(d.dim(), d.width());
    let offsets: Vec<isize> = dirs.iter().map(|e| d.offset(e)).collect();
    let mut worst = f64::INFINITY;
    let mut worst_node = None;
    let mut worst_dir = Vec::new();
    for &i in d.interior() {
        let c = u.values[i];
        for (k, &o) in offsets.iter().enumerate() {
            let a = u.values[(i as isize + o) as usize];
            let b = u.values[(i as isize - o) as usize];
            let s = a + b - 2.0 * c;
            if s < worst {
                worst = s;
                worst_node = Some(i);
                worst_dir = dirs[k].clone();
            }
        }
    }
    let scale = u.scale();
    let tolerance = if scale > 0.0 { TOL_CONVEX_RELATIVE * scale } else { TOL_CONVEX_RELATIVE };
    ConvexityReport { passed: worst >= -tolerance, worst, worst_node, worst_direction: worst_dir, tolerance }
}

/// Counts of nodes per class; convenience for reports.
pub fn class_counts(domain: &Domain) -> (usize, usize, usize) {
    let mut c = (0, 0, 0);
    for cl in domain.classes() {
        match cl {
            NodeClass::Interior => c.0 += 1,
            NodeClass::Band => c.1 += 1,
            NodeClass::Exterior => c.2 += 1,
        }
    }
    c
}
