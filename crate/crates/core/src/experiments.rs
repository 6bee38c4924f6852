//! Registry of reproducible experiments.
//!
//! Each entry builds its runs, applies the probes of [`crate::analysis`] and
//! judges the measured quantities against expected outcomes.
//! [`run_experiment`] writes `<out>/<name>/{snapshots, probes, plots}` and a
//! `summary.txt` with one line per outcome. The seed only drives randomized
//! draws (random data pairs, random scaling maps); the solver is deterministic.
//!
//! Lateral boundary data is frozen at its initial values unless an entry says
//! otherwise.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::report::Table;
use crate::analysis::{
    c1alpha_exponent, default_separation_eps, geometric_range, holder_time_fit, interface_exponent, separation_probe,
    LineSamples,
};
use crate::error::{Error, Result};
use crate::evolution::{comparison_check, evolve, evolve_many, rescale, BoundaryData, EvolutionState, ScalingMap, StepControl};
use crate::exact::{build_profile, profile_residual, Barrier};
use crate::geometry::{flat_set, legendre};
use crate::grid::csv::{fmt_real, save_grid};
use crate::grid::{build_domain, sample, CoefficientField, Domain, GridFunction, Shape};
use crate::operator::{centered_det, centered_hessian, MaOperator, OperatorConfig, ReducedMaOperator, Variant};

/// Acceptance rule for a measured value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expect {
    AtMost(f64),
    AtLeast(f64),
    /// Strictly greater.
    Above(f64),
    Within(f64, f64),
}

impl Expect {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Self::AtMost(b) => v <= b,
            Self::AtLeast(b) => v >= b,
            Self::Above(b) => v > b,
            Self::Within(lo, hi) => v >= lo && v <= hi,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Self::AtMost(b) => format!("<= {}", fmt_real(b)),
            Self::AtLeast(b) => format!(">= {}", fmt_real(b)),
            Self::Above(b) => format!("> {}", fmt_real(b)),
            Self::Within(lo, hi) => format!("in [{}, {}]", fmt_real(lo), fmt_real(hi)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub value: f64,
    pub expect: Expect,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub name: String,
    pub outcomes: Vec<Outcome>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    /// All outcomes pass (vacuously for an empty report).
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn outcome(&self, label: &str) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.label == label)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {}", self.name);
        for o in &self.outcomes {
            let tag = if o.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{tag} {}: {} (expected {})", o.label, fmt_real(o.value), o.expect.describe());
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

/// Working state of one experiment run: outcomes so far and the output
/// directory, written to as artifacts are produced.
pub struct Context {
    seed: u64,
    dir: Option<PathBuf>,
    report: ExperimentReport,
}

impl Context {
    fn new(name: &str, seed: u64, dir: Option<PathBuf>) -> Self {
        Self { seed, dir, report: ExperimentReport { name: name.to_string(), ..Default::default() } }
    }

    pub fn check(&mut self, label: &str, value: f64, expect: Expect) {
        let passed = expect.admits(value);
        self.report.outcomes.push(Outcome { label: label.to_string(), value, expect, passed });
    }

    pub fn note(&mut self, text: String) {
        self.report.notes.push(text);
    }

    /// Generator for the `stream`-th randomized draw family.
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    fn table(&self, t: &Table, log: bool) -> Result<()> {
        if let Some(dir) = &self.dir {
            t.emit(dir, log)?;
        }
        Ok(())
    }

    fn snapshots(&self, run: &str, snaps: &[GridFunction]) -> Result<()> {
        if let Some(dir) = &self.dir {
            let sd = dir.join("snapshots");
            fs::create_dir_all(&sd)?;
            for (k, u) in snaps.iter().enumerate() {
                save_grid(u, &sd.join(format!("{run}_{k:03}.csv")))?;
            }
        }
        Ok(())
    }

    fn probe_file(&self, name: &str, text: &[u8]) -> Result<()> {
        if let Some(dir) = &self.dir {
            let pd = dir.join("probes");
            fs::create_dir_all(&pd)?;
            fs::write(pd.join(name), text)?;
        }
        Ok(())
    }
}

fn stage<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage { stage, source: Box::new(e) })
}

pub struct ExperimentSpec {
    pub name: &'static str,
    /// Topic tags used by [`list_experiments`] filters.
    pub topics: &'static [&'static str],
    pub description: &'static str,
    run: fn(&mut Context) -> Result<()>,
}

impl std::fmt::Debug for ExperimentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExperimentSpec").field("name", &self.name).field("topics", &self.topics).finish()
    }
}

static REGISTRY: &[ExperimentSpec] = &[
    ExperimentSpec {
        name: "selfsimilar-n4p1",
        topics: &["self-similar"],
        description: "Self-similar profile for n = 4, p = 1: exponent, constant, first integral and PDE residual under refinement.",
        run: selfsimilar_n4p1,
    },
    ExperimentSpec {
        name: "edge-persist-n4p1",
        topics: &["separation", "self-similar"],
        description: "Reduced axisymmetric evolution of the self-similar data, n = 4, p = 1, exact lateral data: the origin stays at zero up to 0.3 T.",
        run: edge_persist_n4p1,
    },
    ExperimentSpec {
        name: "edge-moves-n3p1",
        topics: &["separation"],
        description: "3-D evolution, p = 1, from max(|x3|, 2(|x|^2 - 0.3)) on the unit ball: the edge point at the origin lifts off.",
        run: edge_moves_n3p1,
    },
    ExperimentSpec {
        name: "flat-persist-n2p1",
        topics: &["separation", "flat-side"],
        description: "Flat disk data (|x| - 0.45)_+^2 in 2-D with p = 1: the inner disk stays flat up to t = 0.05.",
        run: flat_persist_n2p1,
    },
    ExperimentSpec {
        name: "flat-moves-n2p04",
        topics: &["separation", "flat-side"],
        description: "Flat disk data (|x| - 0.45)_+^2 in 2-D with p = 0.4 < 1/n: every node exceeds eps by t = 0.05.",
        run: flat_moves_n2p04,
    },
    ExperimentSpec {
        name: "holder-time-n2p1",
        topics: &["time-regularity"],
        description: "Increment fit at the vertex of |x| + |x|^2/2, p = 1: slope at least 1/(np+1) - 0.1.",
        run: holder_time_n2p1,
    },
    ExperimentSpec {
        name: "holder-time-n2p2",
        topics: &["time-regularity"],
        description: "Increment fit at the vertex of 0.3|x| + |x|^2/2, p = 2: slope at least 1/(np+1) - 0.1.",
        run: holder_time_n2p2,
    },
    ExperimentSpec {
        name: "interface-n2p1",
        topics: &["interface", "flat-side"],
        description: "Growth exponent off the contact set of the evolved flat-disk solution, p = 1, and on planted powers of the distance.",
        run: interface_n2p1,
    },
    ExperimentSpec {
        name: "comparison-random",
        topics: &["comparison"],
        description: "50 seeded random ordered pairs of convex data under random coefficients stay ordered.",
        run: comparison_random,
    },
    ExperimentSpec {
        name: "comparison-barriers",
        topics: &["comparison"],
        description: "A solution between the fast and slow paraboloid barriers stays between them.",
        run: comparison_barriers,
    },
    ExperimentSpec {
        name: "scaling-quadratic",
        topics: &["scaling"],
        description: "Rescaled exact quadratic solutions solve the equation up to the propagated interpolation error, 10 seeded draws.",
        run: scaling_quadratic,
    },
    ExperimentSpec {
        name: "legendre-quadratic",
        topics: &["duality"],
        description: "The discrete conjugate of a quadratic solution satisfies the dual equation, with the residual falling under refinement.",
        run: legendre_quadratic,
    },
    ExperimentSpec {
        name: "angle-planted",
        topics: &["angle"],
        description: "C^{1,alpha} exponent recovery from angle openings on planted |s|^(1+gamma).",
        run: angle_planted,
    },
    ExperimentSpec { name: "noop", topics: &["plumbing"], description: "Runs nothing; an empty report.", run: noop },
];

/// Registry entries whose name or a topic tag equals `filter`, in registry
/// order; all entries without a filter.
pub fn list_experiments(filter: Option<&str>) -> Vec<&'static ExperimentSpec> {
    REGISTRY.iter().filter(|e| filter.is_none_or(|f| e.name == f || e.topics.contains(&f))).collect()
}

pub fn find_experiment(name: &str) -> Result<&'static ExperimentSpec> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

/// Runs a registry entry. With `out`, artifacts go to `<out>/<name>/`; on a
/// stage error the artifacts written so far are kept and `summary.txt`
/// records the failing stage.
pub fn run_experiment(name: &str, seed: u64, out: Option<&Path>) -> Result<ExperimentReport> {
    let spec = find_experiment(name)?;
    let dir = out.map(|o| o.join(spec.name));
    if let Some(d) = &dir {
        fs::create_dir_all(d)?;
    }
    let mut ctx = Context::new(spec.name, seed, dir.clone());
    let result = (spec.run)(&mut ctx);
    if let Err(e) = &result {
        ctx.note(format!("aborted: {e}"));
    }
    if let Some(d) = &dir {
        fs::write(d.join("summary.txt"), ctx.report.summary())?;
    }
    result.map(|()| ctx.report)
}

fn noop(_: &mut Context) -> Result<()> {
    Ok(())
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn selfsimilar_n4p1(ctx: &mut Context) -> Result<()> {
    let prof = stage("profile", build_profile(4, 1.0, 1.0))?;
    ctx.check("beta - 6", (prof.beta() - 6.0).abs(), Expect::AtMost(0.0));
    ctx.check("relative error of C against 1/216", (prof.c_np() * 216.0 - 1.0).abs(), Expect::AtMost(1e-8));
    ctx.check("first-integral drift", prof.gstar().energy_drift(), Expect::AtMost(1e-6));
    let coarse = stage("residual", profile_residual(&prof, 2.0, 400, 0.05, 0.3))?;
    let fine = stage("residual", profile_residual(&prof, 2.0, 800, 0.05, 0.3))?;
    ctx.check("profile residual on 400 cells", coarse.max, Expect::AtMost(5e-3));
    ctx.check("residual ratio under 2x refinement", fine.max / coarse.max, Expect::AtMost(0.5));
    let mut t = Table::new("profile_residual", &["spacing", "max_residual", "checked_nodes"]);
    for r in [&coarse, &fine] {
        t.push(vec![r.spacing, r.max, r.checked as f64]);
    }
    ctx.table(&t, true)?;
    let mut buf = Vec::new();
    prof.write_csv(&mut buf)?;
    ctx.probe_file("profile.csv", &buf)
}

fn edge_persist_n4p1(ctx: &mut Context) -> Result<()> {
    let h = 0.02;
    let prof = Arc::new(stage("profile", build_profile(4, 1.0, 1.0))?);
    let d = Arc::new(stage("domain", Domain::axisymmetric(1.0, -1.0, 1.0, h, 1))?);
    let u0 = stage("initial", sample(&d, 0.0, |x| prof.eval_reduced(x[0], x[1], 0.0).unwrap_or(f64::NAN)))?;
    let op = stage("operator", ReducedMaOperator::new(OperatorConfig::unit(1.0, 1)?, 4, Arc::clone(&d)))?;
    let exact = Arc::clone(&prof);
    let boundary = BoundaryData::function(move |x, t| exact.eval_reduced(x[0], x[1], t).unwrap_or(f64::NAN));
    let mut state = stage("solve", EvolutionState::new(u0.clone(), boundary))?;
    let times: Vec<f64> = (1..=10).map(|k| 0.03 * k as f64).collect();
    let mut snaps = vec![u0];
    snaps.extend(stage("solve", evolve(&mut state, &op, &StepControl::default(), 0.3, &times))?);
    ctx.snapshots("u", &snaps)?;
    let eps = default_separation_eps(h, 1.0);
    let o = d.nearest_node(&[0.0, 0.0]).ok_or_else(|| Error::InvalidArgument("origin off grid".into()))?;
    let rep = stage("probe", separation_probe(&snaps, &[o], eps))?;
    let mut t = Table::new("origin", &["t", "u_origin", "max_deviation_from_exact"]);
    let mut worst = f64::NEG_INFINITY;
    for u in &snaps {
        let dev = d
            .interior()
            .iter()
            .map(|&i| {
                let x = d.coords(i);
                (u.value(i) - prof.eval_reduced(x[0], x[1], u.time()).unwrap_or(f64::NAN)).abs()
            })
            .fold(0.0, f64::max);
        worst = worst.max(u.value(o));
        t.push(vec![u.time(), u.value(o), dev]);
    }
    ctx.table(&t, false)?;
    ctx.check("max u(0, t) for t <= 0.3 T", worst, Expect::AtMost(eps));
    ctx.note(format!("origin crossing: {}, eps = {}", rep.crossings[0].as_str(), fmt_real(eps)));
    Ok(())
}

fn edge_moves_n3p1(ctx: &mut Context) -> Result<()> {
    let h = 1.0 / 20.0;
    let d = Arc::new(stage("domain", build_domain(Shape::unit_ball(3), h, 1))?);
    let u0 = stage("initial", sample(&d, 0.0, |x| x[2].abs().max(2.0 * (norm2(x) - 0.3))))?;
    let op = stage("operator", MaOperator::new(OperatorConfig::unit(1.0, 1)?, Arc::clone(&d)))?;
    let mut state = stage("solve", EvolutionState::new(u0.clone(), BoundaryData::Frozen))?;
    let times = [0.005, 0.01, 0.015, 0.02, 0.025];
    let mut snaps = vec![u0];
    snaps.extend(stage("solve", evolve(&mut state, &op, &StepControl::default(), 0.025, &times))?);
    ctx.snapshots("u", &snaps)?;
    let eps = default_separation_eps(h, 1.0);
    let o = d.nearest_node(&[0.0, 0.0, 0.0]).ok_or_else(|| Error::InvalidArgument("origin off grid".into()))?;
    let rep = stage("probe", separation_probe(&snaps, &[o], eps))?;
    let mut t = Table::new("origin", &["t", "u_origin"]);
    for u in &snaps {
        t.push(vec![u.time(), u.value(o)]);
    }
    ctx.table(&t, false)?;
    let after = snaps.iter().find(|u| u.time() > 0.02).map(|u| u.value(o)).unwrap_or(f64::NAN);
    ctx.check("u(0, t) at the first snapshot after t = 0.02", after, Expect::Above(eps));
    ctx.note(format!("origin crossing: {}, eps = {}", rep.crossings[0].as_str(), fmt_real(eps)));
    Ok(())
}

/// Radius of the flat disk of [`flat_disk_run`].
const FLAT_RADIUS: f64 = 0.45;
/// Slope floor of the sublinear runs; `p < 1` makes the exact slope unbounded
/// at degenerate directions.
const SUBLINEAR_SLOPE_FLOOR: f64 = 0.1;

/// `(|x| − r₀)₊²` on the unit disk with `h = 1/64` (a 129² lattice).
fn flat_disk_run(p: f64, t_end: f64, times: &[f64]) -> Result<Vec<GridFunction>> {
    let h = 1.0 / 64.0;
    let d = Arc::new(stage("domain", build_domain(Shape::unit_ball(2), h, 1))?);
    let u0 = stage("initial", sample(&d, 0.0, |x| (norm2(x).sqrt() - FLAT_RADIUS).max(0.0).powi(2)))?;
    let op = stage("operator", MaOperator::new(OperatorConfig::unit(p, 1)?, Arc::clone(&d)))?;
    let ctl = StepControl { slope_floor: SUBLINEAR_SLOPE_FLOOR, ..StepControl::default() };
    let mut state = stage("solve", EvolutionState::new(u0.clone(), BoundaryData::Frozen))?;
    let mut snaps = vec![u0];
    snaps.extend(stage("solve", evolve(&mut state, &op, &ctl, t_end, times))?);
    Ok(snaps)
}

fn flat_table(snaps: &[GridFunction], inner: &[usize], eps: f64) -> Table {
    let d = snaps[0].domain();
    let mut t = Table::new("flat_disk", &["t", "max_inner", "min_interior", "nodes_below_eps"]);
    for u in snaps {
        let max_inner = inner.iter().map(|&i| u.value(i)).fold(0.0, f64::max);
        let min_all = d.interior().iter().map(|&i| u.value(i)).fold(f64::INFINITY, f64::min);
        let below = d.interior().iter().filter(|&&i| u.value(i) <= eps).count();
        t.push(vec![u.time(), max_inner, min_all, below as f64]);
    }
    t
}

const FLAT_TIMES: [f64; 6] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05];

fn flat_persist_n2p1(ctx: &mut Context) -> Result<()> {
    let snaps = flat_disk_run(1.0, 0.05, &FLAT_TIMES)?;
    ctx.snapshots("u", &snaps)?;
    let d = Arc::clone(snaps[0].domain());
    let eps = default_separation_eps(d.spacing(), 1.0);
    let inner: Vec<usize> =
        d.interior().iter().copied().filter(|&i| norm2(&d.coords(i)).sqrt() <= 0.6 * FLAT_RADIUS).collect();
    let rep = stage("probe", separation_probe(&snaps, &inner, eps))?;
    ctx.table(&flat_table(&snaps, &inner, eps), false)?;
    ctx.check("max u on |x| <= 0.6 r0 for t <= 0.05", rep.max_rise, Expect::AtMost(eps));
    ctx.note(format!("{} inner nodes, {} persistent", inner.len(), rep.count("persistent")));
    Ok(())
}

fn flat_moves_n2p04(ctx: &mut Context) -> Result<()> {
    let snaps = flat_disk_run(0.4, 0.05, &FLAT_TIMES)?;
    ctx.snapshots("u", &snaps)?;
    let d = Arc::clone(snaps[0].domain());
    let eps = default_separation_eps(d.spacing(), 1.0);
    let all: Vec<usize> = d.interior().to_vec();
    let rep = stage("probe", separation_probe(&snaps, &all, eps))?;
    ctx.table(&flat_table(&snaps, &[], eps), false)?;
    let last = snaps.last().map(|u| all.iter().map(|&i| u.value(i)).fold(f64::INFINITY, f64::min)).unwrap_or(f64::NAN);
    ctx.check("min u over interior nodes at t = 0.05", last, Expect::Above(eps));
    ctx.note(format!("crossings: {} instant, {} delayed, {} persistent", rep.count("instant"), rep.count("delayed"), rep.count("persistent")));
    Ok(())
}

fn holder_run(ctx: &mut Context, p: f64, cone: f64, h: f64) -> Result<()> {
    let d = Arc::new(stage("domain", build_domain(Shape::unit_ball(2), h, 1))?);
    let u0 = stage("initial", sample(&d, 0.0, |x| cone * norm2(x).sqrt() + 0.5 * norm2(x)))?;
    let op = stage("operator", MaOperator::new(OperatorConfig::unit(p, 1)?, Arc::clone(&d)))?;
    let mut state = stage("solve", EvolutionState::new(u0.clone(), BoundaryData::Frozen))?;
    let mut times = geometric_range(1e-1, 1e-4, 13);
    times.reverse();
    let t_end = times[times.len() - 1];
    let mut snaps = vec![u0];
    snaps.extend(stage("solve", evolve(&mut state, &op, &StepControl::default(), t_end, &times))?);
    ctx.snapshots("u", &snaps)?;
    let mut t = Table::new("increments", &["t", "increment_origin", "increment_off_center"]);
    let o = d.nearest_node(&[0.0, 0.0]).ok_or_else(|| Error::InvalidArgument("origin off grid".into()))?;
    let side = d.nearest_node(&[0.3, 0.1]).ok_or_else(|| Error::InvalidArgument("probe node off grid".into()))?;
    for u in &snaps[1..] {
        t.push(vec![u.time(), u.value(o) - snaps[0].value(o), u.value(side) - snaps[0].value(side)]);
    }
    ctx.table(&t, true)?;
    let fit = stage("probe", holder_time_fit(&snaps, o))?;
    let side_fit = stage("probe", holder_time_fit(&snaps, side))?;
    let target = 1.0 / (2.0 * p + 1.0) - 0.1;
    ctx.check("increment slope at the vertex", fit.slope, Expect::AtLeast(target));
    ctx.note(format!(
        "fit residual {}, off-center slope {}",
        fmt_real(fit.residual),
        fmt_real(side_fit.slope)
    ));
    Ok(())
}

fn holder_time_n2p1(ctx: &mut Context) -> Result<()> {
    holder_run(ctx, 1.0, 1.0, 1.0 / 40.0)
}

/// The vertex value grows like `h^(−2p)`, so `p = 2` uses a milder cone and
/// a coarser grid to keep the explicit step affordable.
fn holder_time_n2p2(ctx: &mut Context) -> Result<()> {
    holder_run(ctx, 2.0, 0.3, 1.0 / 20.0)
}

fn interface_n2p1(ctx: &mut Context) -> Result<()> {
    let snaps = flat_disk_run(1.0, 0.02, &[0.01, 0.02])?;
    ctx.snapshots("u", &snaps)?;
    let u = &snaps[snaps.len() - 1];
    let h = u.domain().spacing();
    // values below the second-difference resolution h² count as contact
    let flat = stage("probe", flat_set(u, &[0.0, 0.0], 0.0, h * h))?;
    let fit = stage("probe", interface_exponent(u, &flat, &[0.0, 0.0], 0.0, 0.3))?;
    let mut t = Table::new("interface_fit", &["mean_distance", "mean_gap"]);
    for (x, y) in fit.fit.x.iter().zip(&fit.fit.y) {
        t.push(vec![*x, *y]);
    }
    ctx.table(&t, true)?;
    ctx.check("evolved gamma at t = 0.02", fit.gamma, Expect::Within(0.8, 1.2));
    ctx.note(format!("{} contact nodes, {} bins, fit residual {}", flat.nodes.len(), fit.bins, fmt_real(fit.fit.residual)));

    let d = Arc::new(stage("domain", build_domain(Shape::unit_ball(2), 0.01, 1))?);
    let dist = |x: &[f64]| ((x[0].abs() - 0.3).max(0.0)).hypot((x[1].abs() - 0.3).max(0.0));
    for expo in [1.5, 2.0, 2.5] {
        let w = stage("planted", sample(&d, 0.0, |x| dist(x).powf(expo)))?;
        let f = stage("planted", flat_set(&w, &[0.0, 0.0], 0.0, 1e-14))?;
        let fit = stage("planted", interface_exponent(&w, &f, &[0.0, 0.0], 0.0, 0.5))?;
        ctx.check(&format!("planted gamma {}", expo - 1.0), fit.gamma, Expect::Within(expo - 1.05, expo - 0.95));
    }
    Ok(())
}

/// Symmetric matrix with eigenvalues in `[lo, hi]` and a random frame.
fn random_spd(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> DMatrix<f64> {
    let (a, b) = (rng.random_range(lo..hi), rng.random_range(lo..hi));
    let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (c, s) = (th.cos(), th.sin());
    let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    &r * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, b])) * r.transpose()
}

fn quadratic_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            acc += x[i] * m[(i, j)] * x[j];
        }
    }
    acc
}

/// `½xᵀMx + a·x + s|x − z| + c`.
#[derive(Debug, Clone)]
struct RandomConvex {
    m: DMatrix<f64>,
    a: [f64; 2],
    s: f64,
    z: [f64; 2],
    c: f64,
}

impl RandomConvex {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let mut u = || rng.random_range(-1.0..1.0);
        let (a, z, c) = ([0.5 * u(), 0.5 * u()], [0.5 * u(), 0.5 * u()], 0.2 * u());
        let s = rng.random_range(0.0..0.5);
        Self { m: random_spd(rng, 0.5, 2.0), a, s, z, c }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        0.5 * quadratic_form(&self.m, x)
            + self.a[0] * x[0]
            + self.a[1] * x[1]
            + self.s * (x[0] - self.z[0]).hypot(x[1] - self.z[1])
            + self.c
    }
}

fn comparison_random(ctx: &mut Context) -> Result<()> {
    let mut rng = ctx.rng(1);
    let d = Arc::new(stage("domain", build_domain(Shape::unit_ball(2), 0.1, 1))?);
    let mut t = Table::new("pairs", &["pair", "p", "worst_gap"]);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..50 {
        let p = rng.random_range(1.0..2.0);
        let (k1, k2, om) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(0.0..10.0));
        let b = CoefficientField::function(move |x: &[f64], t: f64| 1.5 + 0.5 * (k1 * x[0] + k2 * x[1] + om * t).sin(), 1.0, 2.0)?;
        let op = MaOperator::new(OperatorConfig::new(p, 1, Variant::Plain, b)?, Arc::clone(&d))?;
        let lower = RandomConvex::draw(&mut rng);
        let other = RandomConvex::draw(&mut rng);
        let shift = rng.random_range(0.0..0.1);
        let u0 = sample(&d, 0.0, |x| lower.eval(x))?;
        // max of convex functions: convex and above u0
        let v0 = sample(&d, 0.0, |x| (lower.eval(x) + shift).max(other.eval(x)))?;
        let mut states =
            vec![EvolutionState::new(u0.clone(), BoundaryData::Frozen)?, EvolutionState::new(v0.clone(), BoundaryData::Frozen)?];
        let mut runs = stage("solve", evolve_many(&mut states, &op, &StepControl::default(), 0.05, &[0.01, 0.02, 0.03, 0.04]))?;
        let mut vs = vec![v0];
        vs.append(&mut runs[1]);
        let mut us = vec![u0];
        us.append(&mut runs[0]);
        let rep = stage("compare", comparison_check(&us, &vs))?;
        worst = worst.max(rep.worst_gap);
        t.push(vec![k as f64, p, rep.worst_gap]);
    }
    ctx.table(&t, false)?;
    ctx.check("max (u - v) over 50 ordered pairs", worst, Expect::AtMost(1e-10));
    Ok(())
}

fn comparison_barriers(ctx: &mut Context) -> Result<()> {
    let (p, lambda, cap_lambda) = (1.0, 1.0, 2.0);
    let d = Arc::new(stage("domain", build_domain(Shape::unit_ball(2), 0.05, 1))?);
    let b = CoefficientField::function(|x: &[f64], t: f64| 1.5 + 0.5 * (3.0 * x[0] + 2.0 * x[1] + 5.0 * t).sin(), lambda, cap_lambda)?;
    let op = MaOperator::new(OperatorConfig::new(p, 1, Variant::Plain, b)?, Arc::clone(&d))?;
    let u0 = stage("initial", sample(&d, 0.0, |x| 0.5 * norm2(x) - 1.3))?;
    // lateral data rising between the two barrier speeds
    let g = BoundaryData::function(|x, t| 0.5 * norm2(x) - 1.3 + 1.5 * t);
    let mut state = EvolutionState::new(u0.clone(), g)?;
    let times = [0.02, 0.05, 0.1, 0.15, 0.2];
    let mut us = vec![u0];
    us.extend(stage("solve", evolve(&mut state, &op, &StepControl::default(), 0.2, &times))?);
    ctx.snapshots("u", &us)?;
    let upper = Barrier::upper(2, p, cap_lambda)?;
    let lower = Barrier::lower(2, lambda)?;
    let sampled = |w: &Barrier| us.iter().map(|u| sample(&d, u.time(), |x| w.eval(x, u.time()))).collect::<Result<Vec<_>>>();
    let up = stage("compare", comparison_check(&us, &sampled(&upper)?))?;
    let lo = stage("compare", comparison_check(&sampled(&lower)?, &us))?;
    ctx.check("max (u - upper barrier)", up.worst_gap, Expect::AtMost(1e-10));
    ctx.check("max (lower barrier - u)", lo.worst_gap, Expect::AtMost(1e-10));
    Ok(())
}

/// One draw of the scaling check: the exact solution `½yᵀMy + (det M)^p s`
/// sampled on a source lattice, rescaled by `map` onto a disk of radius 0.5,
/// and its centered residual compared with the propagated interpolation error.
///
/// Returns `(residual, bound)` with
/// `bound = 2 e_I / Δt + p F Σ|H⁻¹_ij| · 4 e_I / h²`, `e_I` the measured
/// interpolation error, `H` the exact rescaled Hessian and `F = (det H)^p`.
pub fn scaling_draw(a: &DMatrix<f64>, m: &DMatrix<f64>, p: f64, map: &ScalingMap) -> Result<(f64, f64)> {
    // source spacing incommensurate with the target one, so interpolation errors do not cancel
    let (ht, hs) = (0.05, 0.0043);
    let target = Arc::new(build_domain(Shape::ball(vec![0.0, 0.0], 0.5), ht, 1)?);
    let reach = a.norm() * (0.5 + 3.0 * ht) + 3.0 * hs;
    let source = Arc::new(build_domain(Shape::cube(2, -reach, reach), hs, 1)?);
    let rate = m.determinant().powf(p);
    let tf = map.time_factor();
    let (t1, t2) = (0.1, 0.2);
    let src: Vec<GridFunction> = [t1, t2]
        .iter()
        .map(|&t| sample(&source, tf * t, |y| 0.5 * quadratic_form(m, y) + rate * tf * t))
        .collect::<Result<_>>()?;
    let v = rescale(&src, map, &target)?;
    let height = map.height();
    let hess = a.transpose() * m * a / height;
    let exact = |x: &[f64], t: f64| (0.5 * quadratic_form(m, &map.apply(x)) + rate * tf * t) / height;
    let mut e_i: f64 = 0.0;
    for vk in &v {
        for i in target.active_nodes() {
            e_i = e_i.max((vk.value(i) - exact(&target.coords(i), vk.time())).abs());
        }
    }
    let dt = v[1].time() - v[0].time();
    let mut residual: f64 = 0.0;
    for &i in target.interior() {
        let det = centered_hessian(&v[0], i)?.determinant();
        let vt = (v[1].value(i) - v[0].value(i)) / dt;
        residual = residual.max((vt - det.max(0.0).powf(p)).abs());
    }
    let f = hess.determinant().powf(p);
    let inv = hess.try_inverse().ok_or(Error::NotPositiveSemidefinite)?;
    let sensitivity = p * f * inv.iter().map(|v| v.abs()).sum::<f64>();
    let bound = 2.0 * e_i / dt + sensitivity * 4.0 * e_i / (ht * ht);
    Ok((residual, bound))
}

fn scaling_quadratic(ctx: &mut Context) -> Result<()> {
    let mut rng = ctx.rng(2);
    let mut t = Table::new("draws", &["draw", "det_a", "height", "p", "residual", "bound"]);
    let mut worst_ratio: f64 = 0.0;
    for k in 0..10 {
        let a = loop {
            let a: DMatrix<f64> = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.5..1.5));
            if (0.3..3.0).contains(&a.determinant().abs()) {
                break a;
            }
        };
        let m = random_spd(&mut rng, 0.5, 2.0);
        let height = rng.random_range(0.3..3.0);
        let p = rng.random_range(0.5..2.0);
        let map = ScalingMap::new(a.clone(), height, p)?;
        let (res, bound) = stage("scaling", scaling_draw(&a, &m, p, &map))?;
        worst_ratio = worst_ratio.max(res / bound);
        t.push(vec![k as f64, a.determinant(), height, p, res, bound]);
    }
    ctx.table(&t, false)?;
    ctx.check("max residual / interpolation bound over 10 draws", worst_ratio, Expect::AtMost(10.0));
    Ok(())
}

/// Max over the dual interior of `|u*_t + (det D²u*)^(−p)|` for the
/// conjugate of `½xᵀMx + (det M)^p t`, primal spacing `h` on `[−1, 1]²`,
/// dual spacing 0.05 on `[−0.3, 0.3]²`, between `t = 0.1` and `t = 0.2`.
pub fn legendre_residual(h: f64) -> Result<f64> {
    let m: DMatrix<f64> = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, 0.4, 0.8]);
    let p = 1.0;
    let rate = m.determinant().powf(p);
    let primal = Arc::new(build_domain(Shape::cube(2, -1.0, 1.0), h, 1)?);
    let dual = Arc::new(build_domain(Shape::cube(2, -0.3, 0.3), 0.05, 1)?);
    let conj: Vec<GridFunction> = [0.1, 0.2]
        .iter()
        .map(|&t| legendre(&sample(&primal, t, |x| 0.5 * quadratic_form(&m, x) + rate * t)?, &dual))
        .collect::<Result<_>>()?;
    let dt = conj[1].time() - conj[0].time();
    let mut worst: f64 = 0.0;
    for &i in dual.interior() {
        let ut = (conj[1].value(i) - conj[0].value(i)) / dt;
        let det = centered_det(&conj[0], i)?;
        worst = worst.max((ut + det.powf(-p)).abs());
    }
    Ok(worst)
}

fn legendre_quadratic(ctx: &mut Context) -> Result<()> {
    let mut t = Table::new("conjugate_residual", &["primal_spacing", "max_residual"]);
    let mut res = Vec::new();
    for h in [0.01, 0.005] {
        let r = stage("legendre", legendre_residual(h))?;
        t.push(vec![h, r]);
        res.push(r);
    }
    ctx.table(&t, true)?;
    ctx.check("conjugate residual at h = 0.01", res[0], Expect::AtMost(5e-2));
    ctx.check("conjugate residual at h = 0.005", res[1], Expect::AtMost(5e-2));
    ctx.check("residual ratio under refinement", res[1] / res[0], Expect::AtMost(1.0 - 1e-12));
    Ok(())
}

fn angle_planted(ctx: &mut Context) -> Result<()> {
    let ds = 1e-4;
    let mut t = Table::new("planted", &["gamma", "alpha_hat"]);
    for gamma in [0.25, 0.5, 0.75, 1.0] {
        let line = LineSamples::uniform(10_000, ds, |s| s.abs().powf(1.0 + gamma));
        let est = stage("probe", c1alpha_exponent(&line, &geometric_range(0.1, 10.0 * (1.0 + gamma) * ds, 9)))?;
        let got = est.alpha_hat.unwrap_or(f64::NAN);
        t.push(vec![gamma, got]);
        ctx.check(&format!("alpha_hat for gamma {gamma}"), got, Expect::Within(gamma - 0.05, gamma + 0.05));
    }
    ctx.table(&t, false)
}
