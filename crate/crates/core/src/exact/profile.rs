//! Self-similar solution `u(x, t) = f(t) v(x / f(t))` whose edge `{x' = 0}`
//! stays flat for a positive time.
//!
//! With `r = |y'|`, `s = y_n / φ(r)`:
//!
//! ```text
//! v(y)  = φ(r) g(s),            φ(r) = C r^β,  β = 2(n−1)/(n−2−1/p)
//! g     = Legendre conjugate of g*,  (g*)'' = |g*|^(n−1−1/p),  g*(±1) = 0
//! f(t)  = [(1+np)(T−t)]^(1/(1+np)),  −f' = f^(−np)
//! ```
//!
//! `v` solves `y·∇v − v = (det D²v)^p`, and `y·∇v − v = (β−1) φ(r) (−g*(ξ))`
//! where `ξ = g'(s)`. Since `g(s) = |s|` for `|s| >= s_flat`, `v = |y_n|`
//! wherever `|y_n| >= s_flat φ(r)`, in particular on the axis `r = 0`.

use std::io::Write;

use super::gstar::{exponent_q, solve_gstar, GStar};
use crate::error::{Error, Result};
use crate::grid::csv::fmt_real;

#[derive(Debug, Clone)]
pub struct SelfSimilarProfile {
    n: usize,
    p: f64,
    beta: f64,
    c_np: f64,
    extinction: f64,
    gstar: GStar,
}

/// `β = 2(n−1)/(n−2−1/p)`.
pub fn beta(n: usize, p: f64) -> Result<f64> {
    exponent_q(n, p)?;
    let nf = n as f64;
    Ok(2.0 * (nf - 1.0) / (nf - 2.0 - 1.0 / p))
}

/// `log(lhs) − log(rhs)` of `φ'' (φ'/r)^(n−2) = (rφ' − φ)^(1/p) φ` for
/// `φ = C r^β`, evaluated from the derivatives of `φ` at `r`.
pub fn phi_equation_log_residual(n: usize, p: f64, c: f64, r: f64) -> Result<f64> {
    let b = beta(n, p)?;
    let phi = c * r.powf(b);
    let d1 = c * b * r.powf(b - 1.0);
    let d2 = c * b * (b - 1.0) * r.powf(b - 2.0);
    let lhs = d2 * (d1 / r).powi(n as i32 - 2);
    let rhs = (r * d1 - phi).powf(1.0 / p) * phi;
    Ok(lhs.ln() - rhs.ln())
}

/// Solves the φ-equation for `C` by Newton iteration in `log C`.
///
/// The log-residual is affine in `log C` with slope `n − 2 − 1/p`, so the
/// iteration converges in one step up to rounding.
pub fn solve_c(n: usize, p: f64) -> Result<f64> {
    let slope = n as f64 - 2.0 - 1.0 / p;
    let mut log_c: f64 = 0.0;
    for _ in 0..20 {
        let res = phi_equation_log_residual(n, p, log_c.exp(), 1.0)?;
        let step = res / slope;
        log_c -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let c = log_c.exp();
    let check = phi_equation_log_residual(n, p, c, 1.0)?;
    if !(check.abs() < 1e-10 && c.is_finite()) {
        return Err(Error::OutOfRange(format!("φ-equation not solved: log residual {check}")));
    }
    Ok(c)
}

/// Builds the profile with `samples` nodes for `g*`.
pub fn build_profile(n: usize, p: f64, extinction: f64) -> Result<SelfSimilarProfile> {
    build_profile_with_samples(n, p, extinction, 4001)
}

pub fn build_profile_with_samples(n: usize, p: f64, extinction: f64, samples: usize) -> Result<SelfSimilarProfile> {
    if !(extinction > 0.0 && extinction.is_finite()) {
        return Err(Error::InvalidArgument(format!("extinction time must be positive, got {extinction}")));
    }
    let gstar = solve_gstar(n, p, samples)?;
    let beta = beta(n, p)?;
    let c_np = solve_c(n, p)?;
    Ok(SelfSimilarProfile { n, p, beta, c_np, extinction, gstar })
}

impl SelfSimilarProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn c_np(&self) -> f64 {
        self.c_np
    }

    pub fn extinction(&self) -> f64 {
        self.extinction
    }

    pub fn gstar(&self) -> &GStar {
        &self.gstar
    }

    pub fn s_flat(&self) -> f64 {
        self.gstar.s_flat()
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.c_np * r.powf(self.beta)
    }

    /// `g(s) = sξ − g*(ξ)` with `g*'(ξ) = s`; `|s|` beyond `s_flat`.
    pub fn g(&self, s: f64) -> f64 {
        if s.abs() >= self.s_flat() {
            return s.abs();
        }
        let xi = self.gstar.inverse_slope(s);
        s * xi - self.gstar.eval(xi).0
    }

    /// `g'(s) = ξ`.
    pub fn g_prime(&self, s: f64) -> f64 {
        self.gstar.inverse_slope(s)
    }

    /// `v` in reduced coordinates `r = |y'| >= 0`, `y = y_n`.
    pub fn v_reduced(&self, r: f64, y: f64) -> f64 {
        let phi = self.phi(r);
        if phi == 0.0 || y.abs() >= self.s_flat() * phi {
            return y.abs();
        }
        phi * self.g(y / phi)
    }

    /// `y·∇v − v = (β − 1) φ(r) (−g*(g'(s)))`, zero in the flat phase.
    pub fn euler_defect_reduced(&self, r: f64, y: f64) -> f64 {
        let phi = self.phi(r);
        if phi == 0.0 || y.abs() >= self.s_flat() * phi {
            return 0.0;
        }
        let xi = self.g_prime(y / phi);
        (self.beta - 1.0) * phi * (-self.gstar.eval(xi).0)
    }

    /// True where `v` is strictly above `|y_n|` (the curved phase).
    pub fn is_curved(&self, r: f64, y: f64) -> bool {
        y.abs() < self.s_flat() * self.phi(r)
    }

    pub fn v(&self, y: &[f64]) -> f64 {
        let n = y.len();
        let r = y[..n - 1].iter().map(|c| c * c).sum::<f64>().sqrt();
        self.v_reduced(r, y[n - 1])
    }

    /// `f(t) = [(1+np)(T−t)]^(1/(1+np))`.
    pub fn time_factor(&self, t: f64) -> f64 {
        let e = 1.0 + self.n as f64 * self.p;
        (e * (self.extinction - t)).max(0.0).powf(1.0 / e)
    }

    /// `u(x, t) = f(t) v(x / f(t))` for `t ∈ [0, T)`.
    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::InvalidArgument(format!("point has dimension {}, profile {}", x.len(), self.n)));
        }
        if !(0.0..self.extinction).contains(&t) {
            return Err(Error::OutOfRange(format!("t = {t} outside [0, {})", self.extinction)));
        }
        let f = self.time_factor(t);
        let y: Vec<f64> = x.iter().map(|c| c / f).collect();
        Ok(f * self.v(&y))
    }

    /// Reduced-coordinate evaluation of `u`.
    pub fn eval_reduced(&self, r: f64, y: f64, t: f64) -> Result<f64> {
        if !(0.0..self.extinction).contains(&t) {
            return Err(Error::OutOfRange(format!("t = {t} outside [0, {})", self.extinction)));
        }
        let f = self.time_factor(t);
        Ok(f * self.v_reduced(r.abs() / f, y / f))
    }

    /// Writes the scalars and the `g*` / `g` tables.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "n,p,beta,c_np,extinction,s_flat")?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            self.n,
            fmt_real(self.p),
            fmt_real(self.beta),
            fmt_real(self.c_np),
            fmt_real(self.extinction),
            fmt_real(self.s_flat())
        )?;
        writeln!(out, "xi,gstar,gstar_prime,s,g")?;
        let sf = self.s_flat();
        let m = self.gstar.nodes().len();
        for k in 0..m {
            // the g column uses a symmetric range of twice the flat slope
            let s = -2.0 * sf + 4.0 * sf * k as f64 / (m - 1) as f64;
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_real(self.gstar.nodes()[k]),
                fmt_real(self.gstar.values()[k]),
                fmt_real(self.gstar.slopes()[k]),
                fmt_real(s),
                fmt_real(self.g(s))
            )?;
        }
        Ok(())
    }
}

/// Outcome of [`profile_residual`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileResidual {
    pub spacing: f64,
    /// Max of `|(y·∇v − v) − det D²v^p|` over checked nodes.
    pub max: f64,
    pub worst_at: (f64, f64),
    pub checked: usize,
    pub curved: usize,
}

/// Tabulates `v` on the reduced window `r ∈ [0, r_max]`, `y ∈ [−r_max/2, r_max/2]`
/// with `nodes` cells across `r_max` and compares `y·∇v − v` to
/// `(det D²v)^p`, the determinant by centered differences.
///
/// Nodes with `r < r_min`, and nodes whose 3×3 stencil meets the transition
/// band `(1 − band) s_flat <= |s| <= (1 + band) s_flat` or mixes the flat and
/// curved phases, are skipped: `g''` blows up at `|s| = s_flat`, where no
/// fixed-stencil difference is consistent.
pub fn profile_residual(
    profile: &SelfSimilarProfile,
    r_max: f64,
    nodes: usize,
    r_min: f64,
    band: f64,
) -> Result<ProfileResidual> {
    use crate::grid::{sample, Domain};
    use crate::operator::reduced_det_centered;
    use std::sync::Arc;

    let h = r_max / nodes as f64;
    let d = Arc::new(Domain::axisymmetric(r_max, -0.5 * r_max, 0.5 * r_max, h, 1)?);
    let u = sample(&d, 0.0, |x| profile.v_reduced(x[0].abs(), x[1]))?;
    let sf = profile.s_flat();
    let phase = |r: f64, y: f64| {
        let phi = profile.phi(r);
        let s = if phi > 0.0 { y.abs() / phi } else { f64::INFINITY };
        if s < sf * (1.0 - band) {
            0
        } else if s > sf * (1.0 + band) {
            2
        } else {
            1
        }
    };
    let mut out = ProfileResidual { spacing: h, max: 0.0, worst_at: (0.0, 0.0), checked: 0, curved: 0 };
    for &i in d.interior() {
        let x = d.coords(i);
        if x[0] < r_min {
            continue;
        }
        let centre = phase(x[0], x[1]);
        let uniform = (-1..=1)
            .flat_map(|a| (-1..=1).map(move |b| (a, b)))
            .all(|(a, b)| phase(x[0] + a as f64 * h, x[1] + b as f64 * h) == centre);
        if centre == 1 || !uniform {
            continue;
        }
        let Ok(det) = reduced_det_centered(&u, i, profile.n()) else { continue };
        let res = (profile.euler_defect_reduced(x[0], x[1]) - det.max(0.0).powf(profile.p())).abs();
        out.checked += 1;
        if centre == 0 {
            out.curved += 1;
        }
        if res > out.max {
            out.max = res;
            out.worst_at = (x[0], x[1]);
        }
    }
    if out.curved == 0 {
        return Err(Error::InsufficientData("no curved-phase nodes in the residual window".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> SelfSimilarProfile {
        build_profile_with_samples(4, 1.0, 1.0, 2001).unwrap()
    }

    #[test]
    fn exponents_n4_p1() {
        let pr = profile();
        assert_eq!(pr.beta(), 6.0);
        assert!((pr.c_np() * 216.0 - 1.0).abs() < 1e-8);
        assert!((pr.time_factor(0.0) - 5f64.powf(0.2)).abs() < 1e-14);
        assert_eq!(pr.time_factor(1.0), 0.0);
    }

    #[test]
    fn c_matches_log_linear_closed_form() {
        for (n, p) in [(4, 0.75), (4, 2.0), (3, 1.5), (3, 3.0)] {
            let b = beta(n, p).unwrap();
            let nf = n as f64;
            let log_c = ((1.0 / p - 1.0) * (b - 1.0).ln() - (nf - 1.0) * b.ln()) / (nf - 2.0 - 1.0 / p);
            assert!((solve_c(n, p).unwrap() / log_c.exp() - 1.0).abs() < 1e-10);
            for r in [0.3, 1.0, 2.5] {
                assert!(phi_equation_log_residual(n, p, solve_c(n, p).unwrap(), r).unwrap().abs() < 1e-8);
            }
        }
    }

    #[test]
    fn g_is_even_convex_and_above_abs() {
        let pr = profile();
        let sf = pr.s_flat();
        let xs: Vec<f64> = (0..=400).map(|k| -2.0 * sf + 4.0 * sf * k as f64 / 400.0).collect();
        let gs: Vec<f64> = xs.iter().map(|&s| pr.g(s)).collect();
        for (k, &s) in xs.iter().enumerate() {
            assert!(gs[k] >= s.abs() - 1e-12);
            assert!((gs[k] - pr.g(-s)).abs() < 1e-10);
            if s.abs() >= sf {
                assert_eq!(gs[k], s.abs());
            }
        }
        for k in 1..xs.len() - 1 {
            assert!(gs[k + 1] + gs[k - 1] - 2.0 * gs[k] >= -1e-10);
        }
        // continuity at the junction
        assert!((pr.g(sf * (1.0 - 1e-9)) - sf).abs() < 1e-6);
    }

    #[test]
    fn edge_stays_at_zero() {
        let pr = profile();
        for t in [0.0, 0.1, 0.25, 0.5] {
            assert_eq!(pr.eval(&[0.0, 0.0, 0.0, 0.0], t).unwrap(), 0.0);
        }
        assert!(pr.eval(&[0.0; 4], 1.0).is_err());
    }
}
