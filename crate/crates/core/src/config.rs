//! Run configuration: flat dotted keys in TOML syntax.
//!
//! ```text
//! domain.kind = "ball"          # ball | box | axisymmetric
//! domain.dim = 2
//! domain.radius = 1.0
//! domain.h = 0.05
//! op.p = 1.0
//! op.width = 1
//! op.variant = "plain"          # plain | gcf
//! op.b = "1 + 0.5*x1^2"         # optional, with op.lambda and op.Lambda
//! init.u0 = "0.5*r^2"           # or init.kind = "selfsimilar" with init.T
//! boundary.g = "0.5*r^2 + t"    # optional; band values frozen otherwise
//! run.t_end = 0.1
//! run.snapshots = [0.01, 0.05]
//! ```
//!
//! Expressions use `x1..x4`, `r = |x|`, `t` and `pi`. On axisymmetric
//! domains the coordinates are `(x1, x2) = (r, y)`.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::evolution::{evolve, BoundaryData, EvolutionState, StepControl};
use crate::exact::build_profile;
use crate::expr::Expr;
use crate::grid::{build_domain, sample, CoefficientField, Domain, GridFunction, Shape};
use crate::operator::{MaOperator, OperatorConfig, ReducedMaOperator, SpatialOperator, Variant};

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Reduced `(r, y)` lattice of an `n`-dimensional axisymmetric problem.
    Axisymmetric { n: usize, r_max: f64, y_lo: f64, y_hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Expression(Expr),
    /// The self-similar solution with extinction time `T`, at `t = 0`.
    SelfSimilar { extinction: f64 },
    File(String),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub h: f64,
    pub p: f64,
    pub width: usize,
    pub variant: Variant,
    /// `b(x, t)` with its bounds; `None` means `b ≡ 1`.
    pub coefficient: Option<(Expr, f64, f64)>,
    pub init: InitSpec,
    pub boundary: Option<Expr>,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub control: StepControl,
}

/// Snapshots of a run, the initial state first.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<GridFunction>,
    pub steps: u64,
}

struct Keys<'a> {
    root: &'a Table,
    used: Vec<String>,
}

impl<'a> Keys<'a> {
    fn get(&mut self, key: &str) -> Option<&'a Value> {
        let (ns, name) = key.split_once('.')?;
        let v = self.root.get(ns)?.as_table()?.get(name)?;
        self.used.push(key.to_string());
        Some(v)
    }

    fn real(&mut self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Error::Config(format!("{key}: expected a number, got {v}"))),
        }
    }

    fn real_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    fn need_real(&mut self, key: &str) -> Result<f64> {
        self.real(key)?.ok_or_else(|| Error::Config(format!("missing key {key}")))
    }

    fn int(&mut self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(v) => Err(Error::Config(format!("{key}: expected a nonnegative integer, got {v}"))),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<&'a str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(v) => Err(Error::Config(format!("{key}: expected a string, got {v}"))),
        }
    }

    fn reals(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(f) => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(Error::Config(format!("{key}: expected numbers"))),
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
            Some(v) => Err(Error::Config(format!("{key}: expected an array, got {v}"))),
        }
    }

    fn expr(&mut self, key: &str) -> Result<Option<Expr>> {
        match self.string(key)? {
            None => Ok(None),
            Some(s) => Expr::parse(s).map(Some).map_err(|e| Error::Config(format!("{key}: {e}"))),
        }
    }

    /// Every key present must have been read.
    fn finish(&self) -> Result<()> {
        for (ns, v) in self.root {
            let Some(t) = v.as_table() else {
                return Err(Error::Config(format!("top-level key {ns} must be namespaced (e.g. {ns}.name)")));
            };
            for name in t.keys() {
                let k = format!("{ns}.{name}");
                if !self.used.contains(&k) {
                    return Err(Error::Config(format!("unknown key {k}")));
                }
            }
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut k = Keys { root: &root, used: Vec::new() };

        let kind = k.string("domain.kind")?.unwrap_or("ball");
        let domain = match kind {
            "ball" => {
                let center = match k.reals("domain.center")? {
                    Some(c) => c,
                    None => vec![0.0; k.int("domain.dim")?.unwrap_or(2)],
                };
                DomainSpec::Ball { center, radius: k.real_or("domain.radius", 1.0)? }
            }
            "box" => {
                let dim = k.int("domain.dim")?;
                let lower = match k.reals("domain.lower")? {
                    Some(v) => v,
                    None => vec![k.real_or("domain.lo", -1.0)?; dim.unwrap_or(2)],
                };
                let upper = match k.reals("domain.upper")? {
                    Some(v) => v,
                    None => vec![k.real_or("domain.hi", 1.0)?; lower.len()],
                };
                DomainSpec::Box { lower, upper }
            }
            "axisymmetric" => DomainSpec::Axisymmetric {
                n: k.int("domain.n")?.unwrap_or(4),
                r_max: k.real_or("domain.r_max", 1.0)?,
                y_lo: k.real_or("domain.y_lo", -1.0)?,
                y_hi: k.real_or("domain.y_hi", 1.0)?,
            },
            other => return Err(Error::Config(format!("domain.kind: unknown kind {other:?}"))),
        };
        let h = k.need_real("domain.h")?;

        let p = k.need_real("op.p")?;
        let width = k.int("op.width")?.unwrap_or(1);
        let variant = match k.string("op.variant")? {
            None => Variant::Plain,
            Some(s) => Variant::parse(s).ok_or_else(|| Error::Config(format!("op.variant: unknown variant {s:?}")))?,
        };
        let coefficient = match k.expr("op.b")? {
            None => None,
            Some(b) => {
                let lo = k.need_real("op.lambda")?;
                let hi = k.need_real("op.Lambda")?;
                Some((b, lo, hi))
            }
        };

        let init = match k.string("init.kind")?.unwrap_or("expr") {
            "expr" => InitSpec::Expression(k.expr("init.u0")?.ok_or_else(|| Error::Config("missing key init.u0".into()))?),
            "selfsimilar" => InitSpec::SelfSimilar { extinction: k.real_or("init.T", 1.0)? },
            "file" => InitSpec::File(
                k.string("init.file")?.ok_or_else(|| Error::Config("missing key init.file".into()))?.to_string(),
            ),
            other => return Err(Error::Config(format!("init.kind: unknown kind {other:?}"))),
        };
        let boundary = k.expr("boundary.g")?;

        let t_end = k.need_real("run.t_end")?;
        let snapshots = k.reals("run.snapshots")?.unwrap_or_default();
        let d = StepControl::default();
        let control = StepControl {
            kappa: k.real_or("run.kappa", d.kappa)?,
            dt_max: k.real_or("run.dt_max", d.dt_max)?,
            slope_floor: k.real_or("run.slope_floor", d.slope_floor)?,
            epsilon: d.epsilon,
            dt_min: d.dt_min,
        };
        k.finish()?;
        let cfg = Self { domain, h, p, width, variant, coefficient, init, boundary, t_end, snapshots, control };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(Error::Config(format!("domain.h must be positive, got {}", self.h)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!("run.t_end must be nonnegative, got {}", self.t_end)));
        }
        if !(self.control.kappa > 0.0 && self.control.kappa < 1.0) {
            return Err(Error::Config("run.kappa must lie in (0, 1)".into()));
        }
        if self.snapshots.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("run.snapshots must be sorted".into()));
        }
        if let DomainSpec::Axisymmetric { n, .. } = self.domain {
            if !(3..=4).contains(&n) {
                return Err(Error::Config(format!("domain.n must be 3 or 4, got {n}")));
            }
        }
        self.operator_config()?;
        Ok(())
    }

    pub fn build_domain(&self) -> Result<Arc<Domain>> {
        let d = match &self.domain {
            DomainSpec::Ball { center, radius } => build_domain(Shape::ball(center.clone(), *radius), self.h, self.width)?,
            DomainSpec::Box { lower, upper } => {
                build_domain(Shape::Box { lower: lower.clone(), upper: upper.clone() }, self.h, self.width)?
            }
            DomainSpec::Axisymmetric { r_max, y_lo, y_hi, .. } => {
                Domain::axisymmetric(*r_max, *y_lo, *y_hi, self.h, self.width)?
            }
        };
        Ok(Arc::new(d))
    }

    pub fn operator_config(&self) -> Result<OperatorConfig> {
        let coefficient = match &self.coefficient {
            None => CoefficientField::unit(),
            Some((b, lo, hi)) => {
                let b = b.clone();
                CoefficientField::function(move |x, t| b.eval(x, t), *lo, *hi)?
            }
        };
        OperatorConfig::new(self.p, self.width, self.variant, coefficient)
    }

    pub fn build_operator(&self, domain: &Arc<Domain>) -> Result<Box<dyn SpatialOperator>> {
        let cfg = self.operator_config()?;
        Ok(match self.domain {
            DomainSpec::Axisymmetric { n, .. } => Box::new(ReducedMaOperator::new(cfg, n, Arc::clone(domain))?),
            _ => Box::new(MaOperator::new(cfg, Arc::clone(domain))?),
        })
    }

    /// Initial data on `domain`, at `t = 0` (or the stored time for files).
    pub fn initial(&self, domain: &Arc<Domain>) -> Result<GridFunction> {
        match &self.init {
            InitSpec::Expression(e) => sample(domain, 0.0, |x| e.eval(x, 0.0)),
            InitSpec::SelfSimilar { extinction } => {
                let n = match self.domain {
                    DomainSpec::Axisymmetric { n, .. } => n,
                    _ => domain.dim(),
                };
                let prof = build_profile(n, self.p, *extinction)?;
                match self.domain {
                    DomainSpec::Axisymmetric { .. } => {
                        sample(domain, 0.0, |x| prof.eval_reduced(x[0], x[1], 0.0).unwrap_or(f64::NAN))
                    }
                    _ => sample(domain, 0.0, |x| prof.eval(x, 0.0).unwrap_or(f64::NAN)),
                }
            }
            InitSpec::File(path) => {
                let u = crate::grid::csv::load_grid(Path::new(path))?;
                if !u.domain().same_lattice(domain) {
                    return Err(Error::Config(format!("init.file {path}: lattice differs from the configured domain")));
                }
                Ok(u)
            }
        }
    }

    pub fn boundary_data(&self) -> BoundaryData {
        match &self.boundary {
            None => BoundaryData::Frozen,
            Some(g) => {
                let g = g.clone();
                BoundaryData::function(move |x, t| g.eval(x, t))
            }
        }
    }

    /// Builds everything and evolves to `run.t_end`.
    pub fn solve(&self) -> Result<RunOutput> {
        let domain = self.build_domain()?;
        let op = self.build_operator(&domain)?;
        let u0 = self.initial(&domain)?;
        if let Some((_, lo, hi)) = &self.coefficient {
            let cfg = self.operator_config()?;
            let mut times = self.snapshots.clone();
            times.push(self.t_end);
            cfg.coefficient.check_bounds(&domain, &times).map_err(|e| Error::Config(format!("op.b outside [{lo}, {hi}]: {e}")))?;
        }
        let mut state = EvolutionState::new(u0, self.boundary_data())?;
        let mut snapshots = vec![state.function().clone()];
        snapshots.extend(evolve(&mut state, op.as_ref(), &self.control, self.t_end, &self.snapshots)?);
        Ok(RunOutput { snapshots, steps: state.steps() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUADRATIC: &str = r#"
domain.kind = "ball"
domain.dim = 2
domain.h = 0.1
op.p = 1.0
init.u0 = "0.5*r^2"
boundary.g = "0.5*r^2 + t"
run.t_end = 0.05
run.snapshots = [0.01, 0.05]
"#;

    #[test]
    fn parses_and_solves() {
        let cfg = RunConfig::parse(QUADRATIC).unwrap();
        assert_eq!(cfg.domain, DomainSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 });
        let out = cfg.solve().unwrap();
        assert_eq!(out.snapshots.len(), 3);
        let last = out.snapshots.last().unwrap();
        assert_eq!(last.time(), 0.05);
        let o = last.domain().nearest_node(&[0.0, 0.0]).unwrap();
        assert!((last.value(o) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn unknown_and_missing_keys_are_errors() {
        let bad = format!("{QUADRATIC}\nop.q = 2\n");
        assert!(matches!(RunConfig::parse(&bad), Err(Error::Config(m)) if m.contains("op.q")));
        let missing = QUADRATIC.replace("op.p = 1.0\n", "");
        assert!(matches!(RunConfig::parse(&missing), Err(Error::Config(m)) if m.contains("op.p")));
        let typed = QUADRATIC.replace("op.p = 1.0", "op.p = \"one\"");
        assert!(RunConfig::parse(&typed).is_err());
    }

    #[test]
    fn coefficient_and_axisymmetric() {
        let text = r#"
domain.kind = "axisymmetric"
domain.n = 4
domain.r_max = 1.0
domain.y_lo = -1.0
domain.y_hi = 1.0
domain.h = 0.1
op.p = 1.0
op.b = "1 + 0.5*x1^2"
op.lambda = 1.0
op.Lambda = 1.5
init.kind = "selfsimilar"
init.T = 1.0
run.t_end = 0.0
"#;
        let cfg = RunConfig::parse(text).unwrap();
        let d = cfg.build_domain().unwrap();
        assert_eq!(d.mirror_axis(), Some(0));
        let u0 = cfg.initial(&d).unwrap();
        let o = d.nearest_node(&[0.0, 0.0]).unwrap();
        assert_eq!(u0.value(o), 0.0);
    }
}
