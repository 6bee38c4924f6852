use crate::error::{Error, Result};

/// Internal RK4 step bound.
const MAX_STEP: f64 = 1e-4;

/// Tabulated even solution of `w'' = |w|^q` on `[-1, 1]` with `w(±1) = 0`,
/// `w < 0` inside.
#[derive(Debug, Clone)]
pub struct GStar {
    q: f64,
    /// Nodes `t_k = -1 + 2k / (samples - 1)`.
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    energy: f64,
}

/// `q = n − 1 − 1/p`; requires `p > 1/(n−2)`.
pub fn exponent_q(n: usize, p: f64) -> Result<f64> {
    if n < 3 || !(p > 0.0) || p * (n as f64 - 2.0) <= 1.0 {
        return Err(Error::SubcriticalExponent { n, p });
    }
    Ok(n as f64 - 1.0 - 1.0 / p)
}

fn rk4(q: f64, w: f64, dw: f64, step: f64) -> (f64, f64) {
    let acc = |w: f64| w.abs().powf(q);
    let (k1w, k1d) = (dw, acc(w));
    let (k2w, k2d) = (dw + 0.5 * step * k1d, acc(w + 0.5 * step * k1w));
    let (k3w, k3d) = (dw + 0.5 * step * k2d, acc(w + 0.5 * step * k2w));
    let (k4w, k4d) = (dw + step * k3d, acc(w + step * k3w));
    (
        w + step / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
        dw + step / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    )
}

/// First zero of the solution started at `w(0) = -depth`, `w'(0) = 0`.
fn first_zero(q: f64, depth: f64) -> Result<f64> {
    let (mut t, mut w, mut dw) = (0.0, -depth, 0.0);
    let limit = 1e7 as usize;
    for _ in 0..limit {
        let (nw, ndw) = rk4(q, w, dw, MAX_STEP);
        if nw >= 0.0 {
            // Newton on the remaining partial step
            let mut s = -w / dw;
            for _ in 0..50 {
                let (ws, dws) = rk4(q, w, dw, s);
                let ds = ws / dws;
                s -= ds;
                if ds.abs() < 1e-16 {
                    break;
                }
            }
            return Ok(t + s);
        }
        t += MAX_STEP;
        w = nw;
        dw = ndw;
    }
    Err(Error::OutOfRange(format!("no zero found for depth {depth}")))
}

/// Solves for `g*` with exponent `q = n − 1 − 1/p` on `samples` uniform nodes.
pub fn solve_gstar(n: usize, p: f64, samples: usize) -> Result<GStar> {
    solve_gstar_from_depth(n, p, samples, 1.0)
}

/// As [`solve_gstar`], starting the base solve at depth `depth`.
///
/// The base solution `g̃` has first zero `t0`; `g*(t) = a g̃(t / b)` with
/// `b = 1/t0` and `a = b^(2/(1−q))` solves the same equation and vanishes at 1.
/// The tabulation re-integrates from `g*(0) = −a·depth` on a step dividing the
/// node spacing.
pub fn solve_gstar_from_depth(n: usize, p: f64, samples: usize, depth: f64) -> Result<GStar> {
    let q = exponent_q(n, p)?;
    if samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {samples}")));
    }
    if !(depth > 0.0) {
        return Err(Error::InvalidArgument(format!("depth must be positive, got {depth}")));
    }
    let t0 = first_zero(q, depth)?;
    let b = 1.0 / t0;
    let a = b.powf(2.0 / (1.0 - q));
    let center = -a * depth;

    // half grid [0, 1]; the full table mirrors it
    let half = samples / 2;
    let spacing = 1.0 / half as f64;
    let sub = (spacing / MAX_STEP).ceil() as usize;
    let step = spacing / sub as f64;
    let mut hv = vec![center];
    let mut hd = vec![0.0];
    let (mut w, mut dw) = (center, 0.0);
    for _ in 0..half {
        for _ in 0..sub {
            (w, dw) = rk4(q, w, dw, step);
        }
        hv.push(w);
        hd.push(dw);
    }
    let mut nodes = Vec::with_capacity(2 * half + 1);
    let mut values = Vec::with_capacity(2 * half + 1);
    let mut slopes = Vec::with_capacity(2 * half + 1);
    for k in (1..=half).rev() {
        nodes.push(-(k as f64) * spacing);
        values.push(hv[k]);
        slopes.push(-hd[k]);
    }
    for k in 0..=half {
        nodes.push(k as f64 * spacing);
        values.push(hv[k]);
        slopes.push(hd[k]);
    }
    let energy = (-center).powf(q + 1.0) / (q + 1.0);
    Ok(GStar { q, nodes, values, slopes, energy })
}

impl GStar {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// First integral `(w')²/2 + (−w)^(q+1)/(q+1)` at the center.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn energy_at(&self, k: usize) -> f64 {
        0.5 * self.slopes[k] * self.slopes[k] + (-self.values[k]).max(0.0).powf(self.q + 1.0) / (self.q + 1.0)
    }

    /// Largest relative deviation of the first integral over the table.
    pub fn energy_drift(&self) -> f64 {
        (0..self.nodes.len()).map(|k| (self.energy_at(k) - self.energy).abs()).fold(0.0, f64::max) / self.energy
    }

    /// `|w'' − |w|^q|` at interior nodes, with `w''` from a fourth-order
    /// centered difference of the tabulated slopes.
    pub fn ode_residual(&self) -> f64 {
        let m = self.nodes.len();
        let h = self.nodes[1] - self.nodes[0];
        let s = &self.slopes;
        (2..m - 2)
            .map(|k| {
                let d2 = (-s[k + 2] + 8.0 * s[k + 1] - 8.0 * s[k - 1] + s[k - 2]) / (12.0 * h);
                (d2 - self.values[k].abs().powf(self.q)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max |w'| = |w'(1)|`, the slope where the conjugate becomes `|s|`.
    pub fn s_flat(&self) -> f64 {
        self.slopes[self.slopes.len() - 1].abs()
    }

    pub fn center_value(&self) -> f64 {
        self.values[self.values.len() / 2]
    }

    fn cell(&self, xi: f64) -> (usize, f64, f64) {
        let h = self.nodes[1] - self.nodes[0];
        let m = self.nodes.len();
        let k = (((xi - self.nodes[0]) / h).floor().max(0.0) as usize).min(m - 2);
        (k, h, (xi - self.nodes[k]) / h)
    }

    /// `(w(ξ), w'(ξ))` by cubic Hermite interpolation on `(w, w')` and `(w', w'')`.
    pub fn eval(&self, xi: f64) -> (f64, f64) {
        let xi = xi.clamp(-1.0, 1.0);
        let (k, h, s) = self.cell(xi);
        let hermite = |y0: f64, y1: f64, d0: f64, d1: f64| {
            let (s2, s3) = (s * s, s * s * s);
            (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                + (s3 - 2.0 * s2 + s) * h * d0
                + (-2.0 * s3 + 3.0 * s2) * y1
                + (s3 - s2) * h * d1
        };
        let (w0, w1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let a0 = w0.abs().powf(self.q);
        let a1 = w1.abs().powf(self.q);
        (hermite(w0, w1, d0, d1), hermite(d0, d1, a0, a1))
    }

    /// The point `ξ ∈ [-1, 1]` with `w'(ξ) = s`, for `|s| <= s_flat`.
    pub fn inverse_slope(&self, s: f64) -> f64 {
        let sf = self.s_flat();
        if s >= sf {
            return 1.0;
        }
        if s <= -sf {
            return -1.0;
        }
        // slopes are increasing: bracket then bisect on the interpolant
        let k = self.slopes.partition_point(|&v| v < s).clamp(1, self.slopes.len() - 1);
        let (mut lo, mut hi) = (self.nodes[k - 1], self.nodes[k]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid).1 < s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}
