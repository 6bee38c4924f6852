use std::sync::Arc;

use super::stencil::{CompiledFrames, StencilSet};
use super::{power_partials, NodeEval, SpatialOperator};
use crate::error::{Error, Result};
use crate::grid::{CoefficientField, Domain, GridFunction};

/// Right-hand side variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `b(x, t) (det D²u)^p`.
    Plain,
    /// Graph Gauss curvature flow: `(det D²u)^p / (1 + |∇u|²)^(((n+2)p − 1)/2)`, `b ≡ 1`.
    GraphGcf,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plain" => Some(Self::Plain),
            "gcf" | "graph-gcf" => Some(Self::GraphGcf),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Plain => "plain",
            Self::GraphGcf => "gcf",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OperatorConfig {
    pub p: f64,
    pub width: usize,
    pub variant: Variant,
    pub coefficient: CoefficientField,
}

impl OperatorConfig {
    pub fn new(p: f64, width: usize, variant: Variant, coefficient: CoefficientField) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("exponent p must be positive, got {p}")));
        }
        if !(1..=3).contains(&width) {
            return Err(Error::InvalidArgument(format!("stencil width {width} not in 1..=3")));
        }
        Ok(Self { p, width, variant, coefficient })
    }

    /// Plain variant with `b ≡ 1`.
    pub fn unit(p: f64, width: usize) -> Result<Self> {
        Self::new(p, width, Variant::Plain, CoefficientField::unit())
    }
}

/// The wide-stencil operator bound to a domain.
#[derive(Debug, Clone)]
pub struct MaOperator {
    config: OperatorConfig,
    domain: Arc<Domain>,
    frames: CompiledFrames,
    axis_offsets: Vec<isize>,
}

impl MaOperator {
    pub fn new(config: OperatorConfig, domain: Arc<Domain>) -> Result<Self> {
        let set = StencilSet::new(domain.dim(), config.width)?;
        let frames = set.compile(&domain)?;
        let axis_offsets = (0..domain.dim())
            .map(|k| {
                let mut e = vec![0; domain.dim()];
                e[k] = 1;
                domain.offset(&e)
            })
            .collect();
        Ok(Self { config, domain, frames, axis_offsets })
    }

    pub fn config(&self) -> &OperatorConfig {
        &self.config
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    /// `min_frames Π_e max(0, Δ²_e u / (|e|² h²))`.
    pub fn determinant(&self, u: &[f64], node: usize) -> f64 {
        self.frames
            .frames
            .iter()
            .map(|f| f.iter().map(|e| CompiledFrames::second_difference(u, node, e).max(0.0)).product::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// Centered-difference gradient.
    pub fn gradient(&self, u: &[f64], node: usize) -> Vec<f64> {
        let h = self.domain.spacing();
        self.axis_offsets
            .iter()
            .map(|&o| (u[(node as isize + o) as usize] - u[(node as isize - o) as usize]) / (2.0 * h))
            .collect()
    }

    /// Multiplier in front of `D^p`: `b(x, t)` or the inverse GCF gradient factor.
    fn factor(&self, u: &[f64], node: usize, t: f64) -> f64 {
        match self.config.variant {
            Variant::Plain => match self.config.coefficient.constant_value() {
                Some(b) => b,
                None => self.config.coefficient.eval(&self.domain.coords(node), t),
            },
            Variant::GraphGcf => {
                let g2: f64 = self.gradient(u, node).iter().map(|g| g * g).sum();
                let n = self.domain.dim() as f64;
                let k = ((n + 2.0) * self.config.p - 1.0) / 2.0;
                (1.0 + g2).powf(-k)
            }
        }
    }

    pub fn value(&self, u: &GridFunction, node: usize) -> f64 {
        self.evaluate(u.values(), node, u.time(), 0.0).value
    }
}

impl SpatialOperator for MaOperator {
    fn evaluate(&self, u: &[f64], node: usize, t: f64, floor: f64) -> NodeEval {
        let p = self.config.p;
        let n = self.domain.dim();
        let mut d = [0.0f64; 4];
        let mut partial = [0.0f64; 4];
        let mut best = f64::INFINITY;
        let mut slope: f64 = 0.0;
        for frame in &self.frames.frames {
            for (k, e) in frame.iter().enumerate() {
                d[k] = CompiledFrames::second_difference(u, node, e).max(0.0);
            }
            best = best.min(d[..n].iter().product());
            // Any frame may be the active one after a perturbation, so the
            // slope takes the largest per-frame bound.
            power_partials(&d[..n], p, floor, &mut partial[..n]);
            let s: f64 = frame.iter().zip(&partial[..n]).map(|(e, w)| 2.0 / e.len2 * w).sum();
            slope = slope.max(s);
        }
        let c = self.factor(u, node, t);
        NodeEval { value: c * best.powf(p), slope: c * slope }
    }
}

/// `b(x, t) (D_W[u](x))^p` at one node; see [`MaOperator`].
pub fn ma_value(u: &GridFunction, node: usize, config: &OperatorConfig) -> Result<f64> {
    if config.variant != Variant::Plain {
        return Err(Error::InvalidArgument("ma_value requires the plain variant".into()));
    }
    let op = MaOperator::new(config.clone(), Arc::clone(u.domain()))?;
    Ok(op.value(u, node))
}

/// `D_W[u](x)^p / (1 + |∇u|²)^(((n+2)p − 1)/2)` at one node.
pub fn gcf_value(u: &GridFunction, node: usize, config: &OperatorConfig) -> Result<f64> {
    let cfg = OperatorConfig { variant: Variant::GraphGcf, ..config.clone() };
    let op = MaOperator::new(cfg, Arc::clone(u.domain()))?;
    Ok(op.value(u, node))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_domain, sample, Shape};
    use proptest::prelude::*;

    fn disk(h: f64, w: usize) -> Arc<Domain> {
        Arc::new(build_domain(Shape::unit_ball(2), h, w).unwrap())
    }

    fn origin(d: &Domain) -> usize {
        d.nearest_node(&vec![0.0; d.dim()]).unwrap()
    }

    #[test]
    fn paraboloid_gives_one() {
        for dim in 2..=3 {
            let d = Arc::new(build_domain(Shape::unit_ball(dim), 0.1, 2).unwrap());
            let u = sample(&d, 0.0, |x| 0.5 * x.iter().map(|v| v * v).sum::<f64>()).unwrap();
            let cfg = OperatorConfig::unit(1.0, 2).unwrap();
            for &i in d.interior() {
                assert!((ma_value(&u, i, &cfg).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn anisotropic_quadratic_brute_force_frames() {
        let d = disk(0.1, 2);
        let u = sample(&d, 0.0, |x| 0.5 * (2.0 * x[0] * x[0] + 3.0 * x[1] * x[1])).unwrap();
        let cfg = OperatorConfig::unit(1.0, 2).unwrap();
        let v = ma_value(&u, origin(&d), &cfg).unwrap();
        // oracle: exact directional second derivatives eᵀHe/|e|² per frame
        let hess = |e: &[i32]| {
            let (a, b) = (e[0] as f64, e[1] as f64);
            (2.0 * a * a + 3.0 * b * b) / (a * a + b * b)
        };
        let oracle = StencilSet::new(2, 2)
            .unwrap()
            .frames()
            .iter()
            .map(|f| hess(&f[0]) * hess(&f[1]))
            .fold(f64::INFINITY, f64::min);
        assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
        assert!((v - 6.0).abs() <= 0.05);
    }

    #[test]
    fn saddle_clamps_to_zero() {
        let d = disk(0.1, 1);
        let u = sample(&d, 0.0, |x| x[0] * x[0] - x[1] * x[1]).unwrap();
        let cfg = OperatorConfig::unit(1.0, 1).unwrap();
        assert_eq!(ma_value(&u, origin(&d), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn gcf_factor_values() {
        let d = disk(0.05, 1);
        let u = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let cfg = OperatorConfig::unit(1.0, 1).unwrap();
        let o = origin(&d);
        assert!((gcf_value(&u, o, &cfg).unwrap() - ma_value(&u, o, &cfg).unwrap()).abs() < 1e-12);

        // |x| = 1 lies on the boundary of the unit disk, so use a larger one
        let big = Arc::new(build_domain(Shape::ball(vec![0.0, 0.0], 2.0), 0.05, 1).unwrap());
        let u = sample(&big, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let at1 = big.nearest_node(&[1.0, 0.0]).unwrap();
        assert!((gcf_value(&u, at1, &cfg).unwrap() - 2f64.powf(-1.5)).abs() < 1e-9);

        let crit = OperatorConfig::unit(0.25, 1).unwrap();
        let w = sample(&big, 0.0, |x| (x[0] * x[0] + 0.3 * x[1] * x[1] + x[0] * x[1]).exp()).unwrap();
        for &i in big.interior().iter().step_by(37) {
            let a = gcf_value(&w, i, &crit).unwrap();
            let b = ma_value(&w, i, &crit).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn aligned_quadratic_exact_in_3d() {
        let d = Arc::new(build_domain(Shape::unit_ball(3), 0.125, 1).unwrap());
        let u = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1] + 0.5 * x[2] * x[2])).unwrap();
        let cfg = OperatorConfig::new(0.5, 1, Variant::Plain, CoefficientField::constant(2.0).unwrap()).unwrap();
        let v = ma_value(&u, origin(&d), &cfg).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn operator_is_degenerate_elliptic(
            a in 0.1f64..3.0, b in -0.9f64..0.9, c in 0.1f64..3.0,
            k in 0usize..8, delta in 1e-4f64..0.1, p in 0.3f64..2.5, w in 1usize..=2
        ) {
            let d = disk(0.1, 2);
            let q = b * (a * c).sqrt();
            let u = sample(&d, 0.0, |x| 0.5 * (a * x[0] * x[0] + 2.0 * q * x[0] * x[1] + c * x[1] * x[1])
                + 0.1 * (x[0] - 0.2 * x[1]).powi(4)).unwrap();
            let op = MaOperator::new(OperatorConfig::unit(p, w).unwrap(), Arc::clone(&d)).unwrap();
            let o = origin(&d);
            let base = op.value(&u, o);
            let dirs = crate::grid::lattice_directions(2, w);
            let e = &dirs[k % dirs.len()];
            let mut vals = u.values().to_vec();
            let nb = (o as isize + d.offset(e)) as usize;
            vals[nb] += delta;
            prop_assert!(op.evaluate(&vals, o, 0.0, 0.0).value >= base);
            let mut vals = u.values().to_vec();
            vals[o] += delta;
            prop_assert!(op.evaluate(&vals, o, 0.0, 0.0).value <= base);
        }

        #[test]
        fn explicit_step_is_monotone_under_slope_bound(
            a in 0.1f64..3.0, c in 0.1f64..3.0, delta in 0.0f64..1e-3, p in 1.0f64..3.0
        ) {
            // u + dt F(u) with dt = h²/slope must not decrease when u(x) rises
            let d = disk(0.1, 2);
            let h2 = 0.01;
            let u = sample(&d, 0.0, |x| 0.5 * (a * x[0] * x[0] + c * x[1] * x[1]) + 0.05 * x[0].powi(4)).unwrap();
            let op = MaOperator::new(OperatorConfig::unit(p, 2).unwrap(), Arc::clone(&d)).unwrap();
            let o = origin(&d);
            let ev = op.evaluate(u.values(), o, 0.0, 0.0);
            let dt = 0.4 * h2 / ev.slope;
            let mut vals = u.values().to_vec();
            vals[o] += delta;
            let after = vals[o] + dt * op.evaluate(&vals, o, 0.0, 0.0).value;
            let before = u.value(o) + dt * ev.value;
            prop_assert!(after >= before - 1e-15);
        }
    }
}
