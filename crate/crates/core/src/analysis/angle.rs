use crate::error::{Error, Result};
use crate::grid::GridFunction;

use super::fit::ExponentFit;

/// Relative slack of the 1-D convexity check on slope increments.
pub const TOL_LINE_CONVEX: f64 = 1e-9;

/// Samples of `u` along a line `x₀ + s e`, `s` increasing, `s[base] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSamples {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub base: usize,
    pub origin: Vec<f64>,
    /// Unit direction.
    pub direction: Vec<f64>,
    pub time: f64,
}

impl LineSamples {
    /// Closed-form samples on a uniform 1-D grid `s = k ds`, `|k| <= half`.
    pub fn uniform<F: Fn(f64) -> f64>(half: usize, ds: f64, f: F) -> Self {
        let s: Vec<f64> = (0..=2 * half).map(|k| (k as f64 - half as f64) * ds).collect();
        let values = s.iter().map(|&v| f(v)).collect();
        Self { s, values, base: half, origin: vec![0.0], direction: vec![1.0], time: 0.0 }
    }

    /// Active nodes of `u` on the lattice line through `x₀` along `e`.
    pub fn from_grid(u: &GridFunction, x0: usize, e: &[i32]) -> Result<Self> {
        let d = u.domain();
        if e.len() != d.dim() || e.iter().all(|&c| c == 0) {
            return Err(Error::InvalidArgument("line direction must be a nonzero lattice vector".into()));
        }
        if !d.is_active(x0) {
            return Err(Error::InvalidArgument("line base node is not active".into()));
        }
        let len = e.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
        let step = len * d.spacing();
        let walk = |sign: i32| {
            let dir: Vec<i32> = e.iter().map(|&c| sign * c).collect();
            let mut out = Vec::new();
            let mut cur = x0;
            while let Some(j) = d.neighbor(cur, &dir).filter(|&j| d.is_active(j)) {
                out.push(j);
                cur = j;
            }
            out
        };
        let back = walk(-1);
        let fwd = walk(1);
        let mut s = Vec::with_capacity(back.len() + fwd.len() + 1);
        let mut values = Vec::with_capacity(s.capacity());
        for (k, &j) in back.iter().enumerate().rev() {
            s.push(-((k + 1) as f64) * step);
            values.push(u.value(j));
        }
        s.push(0.0);
        values.push(u.value(x0));
        for (k, &j) in fwd.iter().enumerate() {
            s.push((k + 1) as f64 * step);
            values.push(u.value(j));
        }
        Ok(Self {
            s,
            values,
            base: back.len(),
            origin: d.coords(x0),
            direction: e.iter().map(|&c| c as f64 / len).collect(),
            time: u.time(),
        })
    }

    /// Fails with `NonconvexSamples` if some slope increment is below the
    /// relative tolerance.
    pub fn check_convex(&self) -> Result<()> {
        let scale = self.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for k in 1..self.s.len().saturating_sub(1) {
            let left = (self.values[k] - self.values[k - 1]) / (self.s[k] - self.s[k - 1]);
            let right = (self.values[k + 1] - self.values[k]) / (self.s[k + 1] - self.s[k]);
            let ds = (self.s[k + 1] - self.s[k]).min(self.s[k] - self.s[k - 1]);
            let jump = right - left;
            if jump < -TOL_LINE_CONVEX * scale / ds {
                return Err(Error::NonconvexSamples { worst: jump, index: k });
            }
        }
        Ok(())
    }

    /// Adds `a s + c` to every sample.
    pub fn add_affine(&self, a: f64, c: f64) -> Self {
        let mut out = self.clone();
        for (v, s) in out.values.iter_mut().zip(&self.s) {
            *v += a * s + c;
        }
        out
    }
}

/// Witness of `(h, α)` in the angle set: `u(x₀ + s e) >= u_ref − h + max(q₁ s, q₂ s)`
/// on every sample, with `q₂ − q₁ >= α`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleCertificate {
    pub h: f64,
    pub alpha: f64,
    pub q1: f64,
    pub q2: f64,
    pub t: f64,
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
}

impl AngleCertificate {
    /// Checks the defining inequality on `line` with slack `tol`.
    pub fn holds_on(&self, line: &LineSamples, u_ref: f64, tol: f64) -> bool {
        self.q2 - self.q1 >= self.alpha - tol
            && line.s.iter().zip(&line.values).all(|(s, v)| *v >= u_ref - self.h + (self.q1 * s).max(self.q2 * s) - tol)
    }
}

/// Widest angle below the samples with apex `(0, u_ref − h)`:
/// `q₂ = inf_{s>0} (u(s) + h − u_ref)/s`, `q₁ = sup_{s<0} (u(s) + h − u_ref)/s`.
/// `α_max = max(0, q₂ − q₁)`; zero as well when the apex is above `u(0)`.
///
/// Outside the sampled window `u` is continued linearly with its end slopes
/// (the smallest convex continuation), so the infimum also runs over the
/// limits `s → ±∞`, which equal those end slopes.
pub fn angle_opening_from(line: &LineSamples, u_ref: f64, h: f64) -> Result<(f64, AngleCertificate)> {
    if !(h >= 0.0) {
        return Err(Error::InvalidArgument(format!("angle height must be nonnegative, got {h}")));
    }
    line.check_convex()?;
    if line.base == 0 || line.base + 1 >= line.s.len() {
        return Err(Error::InsufficientData("line needs samples on both sides of the base".into()));
    }
    let mut q1 = f64::NEG_INFINITY;
    let mut q2 = f64::INFINITY;
    for (k, (&s, &v)) in line.s.iter().zip(&line.values).enumerate() {
        let q = (v + h - u_ref) / s;
        if k < line.base {
            q1 = q1.max(q);
        } else if k > line.base {
            q2 = q2.min(q);
        }
    }
    let m = line.s.len();
    let right_end = (line.values[m - 1] - line.values[m - 2]) / (line.s[m - 1] - line.s[m - 2]);
    let left_end = (line.values[1] - line.values[0]) / (line.s[1] - line.s[0]);
    q2 = q2.min(right_end);
    q1 = q1.max(left_end);
    let apex_below = line.values[line.base] >= u_ref - h;
    let alpha = if apex_below { (q2 - q1).max(0.0) } else { 0.0 };
    Ok((
        alpha,
        AngleCertificate {
            h,
            alpha,
            q1,
            q2,
            t: line.time,
            origin: line.origin.clone(),
            direction: line.direction.clone(),
        },
    ))
}

/// [`angle_opening_from`] with the apex under the base sample itself.
pub fn angle_opening(line: &LineSamples, h: f64) -> Result<(f64, AngleCertificate)> {
    angle_opening_from(line, line.values[line.base], h)
}

/// Membership of `(h, α)` in the angle set of `line` relative to `u_ref`.
pub fn angle_set_contains(line: &LineSamples, u_ref: f64, h: f64, alpha: f64) -> Result<bool> {
    let (a, _) = angle_opening_from(line, u_ref, h)?;
    Ok(line.values[line.base] >= u_ref - h && a >= alpha)
}

/// Outcome of a `C^{1,α}` probe along one line.
#[derive(Debug, Clone, PartialEq)]
pub struct C1AlphaEstimate {
    pub heights: Vec<f64>,
    pub openings: Vec<f64>,
    /// Log-log fit of opening vs height; absent at corners.
    pub fit: Option<ExponentFit>,
    /// `α̂` solving `slope = α̂ / (α̂ + 1)`.
    pub alpha_hat: Option<f64>,
    /// Openings stay bounded below: the line crosses a corner and `u` is not `C¹` there.
    pub corner: bool,
}

/// Ratio `min α_max / max α_max` above which the openings count as bounded below.
pub const CORNER_RATIO: f64 = 0.5;

/// Fits the decay of `α_max(h)` over `heights` on one line.
pub fn c1alpha_exponent(line: &LineSamples, heights: &[f64]) -> Result<C1AlphaEstimate> {
    let openings = heights.iter().map(|&h| angle_opening(line, h).map(|(a, _)| a)).collect::<Result<Vec<f64>>>()?;
    let hi = openings.iter().copied().fold(0.0, f64::max);
    let lo = openings.iter().copied().fold(f64::INFINITY, f64::min);
    if lo > 0.0 && lo >= CORNER_RATIO * hi {
        return Ok(C1AlphaEstimate { heights: heights.to_vec(), openings, fit: None, alpha_hat: None, corner: true });
    }
    let fit = ExponentFit::new(heights.to_vec(), openings.clone())?;
    let alpha_hat = fit.slope / (1.0 - fit.slope);
    Ok(C1AlphaEstimate { heights: heights.to_vec(), openings, fit: Some(fit), alpha_hat: Some(alpha_hat), corner: false })
}

/// [`c1alpha_exponent`] on the lattice line through `x₀` along `e`.
pub fn c1alpha_exponent_at(u: &GridFunction, x0: usize, e: &[i32], heights: &[f64]) -> Result<C1AlphaEstimate> {
    c1alpha_exponent(&LineSamples::from_grid(u, x0, e)?, heights)
}
