use crate::error::{Error, Result};

/// Minimum number of points of an exponent fit.
pub const FIT_MIN_POINTS: usize = 5;
/// Minimum abscissa span of an exponent fit, in decades.
pub const FIT_MIN_DECADES: f64 = 1.5;

/// Ordinary least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation in natural-log units.
    pub residual: f64,
}

impl ExponentFit {
    /// Fits after checking point count, positivity and decade span.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::with_span(x, y, FIT_MIN_DECADES)
    }

    /// As [`ExponentFit::new`] with a custom minimum span in decades.
    pub fn with_span(x: Vec<f64>, y: Vec<f64>, decades: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument("fit abscissae and ordinates differ in length".into()));
        }
        if x.len() < FIT_MIN_POINTS {
            return Err(Error::InsufficientData(format!("{} points, need {FIT_MIN_POINTS}", x.len())));
        }
        if x.iter().chain(&y).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InsufficientData("fit data must be positive and finite".into()));
        }
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x.iter().copied().fold(0.0, f64::max);
        let span = (hi / lo).log10();
        if span < decades - 1e-9 {
            return Err(Error::InsufficientData(format!("abscissae span {span:.2} decades, need {decades}")));
        }
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let m = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / m;
        let my = ly.iter().sum::<f64>() / m;
        let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residual = (lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / m).sqrt();
        Ok(Self { x, y, slope, intercept, residual })
    }

    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// `n` points geometrically spaced from `hi` down to `lo`.
pub fn geometric_range(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![hi];
    }
    let r = (lo / hi).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| hi * r.powi(k as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x = geometric_range(1.0, 1e-3, 8);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(0.7)).collect();
        let f = ExponentFit::new(x, y).unwrap();
        assert!((f.slope - 0.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn rejects_short_or_narrow_data() {
        let x = geometric_range(1.0, 0.1, 8);
        assert!(ExponentFit::new(x.clone(), x).is_err());
        let x = geometric_range(1.0, 1e-3, 4);
        assert!(ExponentFit::new(x.clone(), x).is_err());
    }
}
