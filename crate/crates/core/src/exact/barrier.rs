use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Closed-form comparison functions with analytic `∂_t w` and `det D²w`.
#[derive(Debug, Clone, PartialEq)]
pub enum Barrier {
    /// `w = m(t + c) + 2|x|² − 3/2`, `m = Λ 4^(np)`, `c = 1/(4m)`.
    ///
    /// `∂_t w = m >= b (det D²w)^p`, so solutions below `w` initially and on
    /// the lateral boundary stay below it.
    Upper { n: usize, m: f64, c: f64 },
    /// `w = ½(|x|² − 1) + λ(t − C)`, `C = 1/λ`.
    ///
    /// `∂_t w = λ <= b (det D²w)^p`, so solutions above `w` stay above it.
    Lower { n: usize, lambda: f64, c: f64 },
    /// `w = ½ xᵀMx + b₀ (det M)^p t`, an exact solution for `b ≡ b₀`.
    Quadratic { m: DMatrix<f64>, p: f64, b0: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    Upper,
    Lower,
    Quadratic,
}

impl BarrierKind {
    /// Accepts `upper`/`lower`/`quadratic`, and the proof-lemma labels
    /// `sub` (the fast paraboloid) and `super` (the slow one).
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "upper" | "sub" => Some(Self::Upper),
            "lower" | "super" => Some(Self::Lower),
            "quadratic" => Some(Self::Quadratic),
            _ => None,
        }
    }
}

impl Barrier {
    pub fn upper(n: usize, p: f64, cap_lambda: f64) -> Result<Self> {
        if !(p > 0.0 && cap_lambda > 0.0) {
            return Err(Error::InvalidArgument("need p > 0 and Λ > 0".into()));
        }
        let m = cap_lambda * 4f64.powf(n as f64 * p);
        Ok(Self::Upper { n, m, c: 1.0 / (4.0 * m) })
    }

    pub fn lower(n: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument("need λ > 0".into()));
        }
        Ok(Self::Lower { n, lambda, c: 1.0 / lambda })
    }

    pub fn quadratic(m: DMatrix<f64>, p: f64, b0: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidArgument("quadratic form must be square".into()));
        }
        let sym = (&m + m.transpose()) * 0.5;
        if (&sym - &m).abs().max() > 1e-12 * m.abs().max().max(1.0) {
            return Err(Error::InvalidArgument("quadratic form must be symmetric".into()));
        }
        let min_eig = sym.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-12 * m.abs().max().max(1.0) {
            return Err(Error::NotPositiveSemidefinite);
        }
        let rate = b0 * sym.determinant().max(0.0).powf(p);
        Ok(Self::Quadratic { m: sym, p, b0, rate })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Upper { n, .. } | Self::Lower { n, .. } => *n,
            Self::Quadratic { m, .. } => m.nrows(),
        }
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            Self::Upper { m, c, .. } => m * (t + c) + 2.0 * r2 - 1.5,
            Self::Lower { lambda, c, .. } => 0.5 * (r2 - 1.0) + lambda * (t - c),
            Self::Quadratic { m, rate, .. } => {
                let mut acc = 0.0;
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        acc += x[i] * m[(i, j)] * x[j];
                    }
                }
                0.5 * acc + rate * t
            }
        }
    }

    pub fn time_derivative(&self) -> f64 {
        match self {
            Self::Upper { m, .. } => *m,
            Self::Lower { lambda, .. } => *lambda,
            Self::Quadratic { rate, .. } => *rate,
        }
    }

    pub fn hessian_det(&self) -> f64 {
        match self {
            Self::Upper { n, .. } => 4f64.powi(*n as i32),
            Self::Lower { .. } => 1.0,
            Self::Quadratic { m, .. } => m.determinant(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_at_origin() {
        let w = Barrier::upper(2, 1.0, 3.0).unwrap();
        assert!((w.eval(&[0.0, 0.0], 0.0) + 1.25).abs() < 1e-15);
        let w = Barrier::upper(3, 0.5, 1.0).unwrap();
        assert!((w.eval(&[0.0; 3], 0.0) + 1.25).abs() < 1e-15);
    }

    #[test]
    fn lower_vanishes_on_unit_sphere_at_c() {
        let w = Barrier::lower(2, 0.5).unwrap();
        assert_eq!(w.eval(&[1.0, 0.0], 2.0), 0.0);
        assert_eq!(w.eval(&[0.6, 0.8], 2.0), 0.0);
    }

    #[test]
    fn quadratic_identity_is_exact_solution() {
        let w = Barrier::quadratic(DMatrix::identity(2, 2), 1.0, 1.0).unwrap();
        assert_eq!(w.time_derivative(), w.hessian_det().powf(1.0));
        assert_eq!(w.eval(&[1.0, 1.0], 0.5), 1.5);
    }

    #[test]
    fn rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(Barrier::quadratic(m, 1.0, 1.0), Err(Error::NotPositiveSemidefinite)));
    }

    #[test]
    fn kinds_parse() {
        assert_eq!(BarrierKind::parse("sub"), Some(BarrierKind::Upper));
        assert_eq!(BarrierKind::parse("super"), Some(BarrierKind::Lower));
        assert_eq!(BarrierKind::parse("other"), None);
    }
}
