use std::fmt;
use std::sync::Arc;

use super::domain::Domain;
use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// The coefficient `b(x, t)` with its ellipticity bounds `λ <= b <= Λ`.
#[derive(Clone)]
pub struct CoefficientField {
    kind: Kind,
    lambda: f64,
    cap_lambda: f64,
}

#[derive(Clone)]
enum Kind {
    Constant(f64),
    Function(Evaluator),
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Constant(b) => write!(f, "CoefficientField::Constant({b})"),
            Kind::Function(_) => {
                write!(f, "CoefficientField::Function[{}, {}]", self.lambda, self.cap_lambda)
            }
        }
    }
}

impl CoefficientField {
    pub fn constant(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("coefficient must be positive, got {b}")));
        }
        Ok(Self { kind: Kind::Constant(b), lambda: b, cap_lambda: b })
    }

    pub fn unit() -> Self {
        Self { kind: Kind::Constant(1.0), lambda: 1.0, cap_lambda: 1.0 }
    }

    /// A general field with declared bounds; call [`Self::check_bounds`] to verify them.
    pub fn function<F>(f: F, lambda: f64, cap_lambda: f64) -> Result<Self>
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        if !(lambda > 0.0 && lambda <= cap_lambda && cap_lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < lambda <= Lambda < inf, got [{lambda}, {cap_lambda}]"
            )));
        }
        Ok(Self { kind: Kind::Function(Arc::new(f)), lambda, cap_lambda })
    }

    #[inline]
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        match &self.kind {
            Kind::Constant(b) => *b,
            Kind::Function(f) => f(x, t),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self.kind {
            Kind::Constant(b) => Some(b),
            Kind::Function(_) => None,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cap_lambda(&self) -> f64 {
        self.cap_lambda
    }

    /// Verifies `λ <= b(x, t) <= Λ` at every active node for each sampled time.
    pub fn check_bounds(&self, domain: &Domain, times: &[f64]) -> Result<()> {
        let mut x = vec![0.0; domain.dim()];
        for &t in times {
            for i in domain.active_nodes() {
                domain.coords_into(i, &mut x);
                let b = self.eval(&x, t);
                if !(b >= self.lambda && b <= self.cap_lambda) {
                    return Err(Error::OutOfRange(format!(
                        "b = {b} at {x:?}, t = {t} outside [{}, {}]",
                        self.lambda, self.cap_lambda
                    )));
                }
            }
        }
        Ok(())
    }
}
