use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::operator::{NodeEval, SpatialOperator};

type BoundaryFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Dirichlet data imposed on the physical boundary band after every step.
#[derive(Clone, Default)]
pub enum BoundaryData {
    /// Band values stay at their initial values.
    #[default]
    Frozen,
    /// Band values follow `g(x, t)`.
    Function(BoundaryFn),
}

impl BoundaryData {
    pub fn function<F>(f: F) -> Self
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self::Function(Arc::new(f))
    }
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Frozen => write!(f, "Frozen"),
            Self::Function(_) => write!(f, "Function"),
        }
    }
}

/// Step-size control of the explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// CFL fraction `κ` in `dt = κ h² / (slope + ε)`.
    pub kappa: f64,
    pub dt_max: f64,
    /// Floor on second differences inside the slope of sublinear powers.
    pub slope_floor: f64,
    pub epsilon: f64,
    /// Below this CFL step the state is declared stiff.
    pub dt_min: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { kappa: 0.4, dt_max: f64::INFINITY, slope_floor: 1e-6, epsilon: 1e-12, dt_min: 1e-14 }
    }
}

impl StepControl {
    pub fn with_dt_max(dt_max: f64) -> Self {
        Self { dt_max, ..Self::default() }
    }
}

/// A discrete solution being advanced in time.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    u: GridFunction,
    steps: u64,
    snapshot_times: Vec<f64>,
    boundary: BoundaryData,
    /// Band nodes that carry Dirichlet data (mirror ghosts excluded).
    dirichlet: Vec<usize>,
    scratch: Vec<NodeEval>,
}

impl EvolutionState {
    /// Wraps `u`; function boundary data is imposed at `u.time()` immediately.
    pub fn new(u: GridFunction, boundary: BoundaryData) -> Result<Self> {
        let d = Arc::clone(u.domain());
        let dirichlet = d.band().iter().copied().filter(|&b| d.mirror_partner(b).is_none()).collect();
        let mut s = Self { u, steps: 0, snapshot_times: Vec::new(), boundary, dirichlet, scratch: Vec::new() };
        s.impose_boundary();
        s.u.apply_mirror();
        Ok(s)
    }

    pub fn function(&self) -> &GridFunction {
        &self.u
    }

    pub fn into_function(self) -> GridFunction {
        self.u
    }

    pub fn time(&self) -> f64 {
        self.u.time()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn snapshot_times(&self) -> &[f64] {
        &self.snapshot_times
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    fn impose_boundary(&mut self) {
        if let BoundaryData::Function(g) = &self.boundary {
            let d = Arc::clone(self.u.domain());
            let t = self.u.time();
            let mut x = vec![0.0; d.dim()];
            let vals = self.u.values_mut();
            for &b in &self.dirichlet {
                d.coords_into(b, &mut x);
                vals[b] = g(&x, t);
            }
        }
    }

    /// Evaluates the operator on the frozen state; returns the CFL step.
    fn evaluate(&mut self, op: &dyn SpatialOperator, ctl: &StepControl) -> f64 {
        let d = Arc::clone(self.u.domain());
        let u = self.u.values();
        let t = self.u.time();
        d.interior().par_iter().map(|&i| op.evaluate(u, i, t, ctl.slope_floor)).collect_into_vec(&mut self.scratch);
        // sequential reduction keeps the result independent of the worker count
        let slope = self.scratch.iter().map(|e| e.slope).fold(0.0, f64::max);
        ctl.kappa * d.spacing() * d.spacing() / (slope + ctl.epsilon)
    }

    /// Applies `u ← u + dt F(u)` with the values from the last evaluation.
    fn apply(&mut self, op: &dyn SpatialOperator, dt: f64, t_new: f64) -> Result<()> {
        let d = Arc::clone(self.u.domain());
        {
            let vals = self.u.values_mut();
            for (k, &i) in d.interior().iter().enumerate() {
                let v = vals[i] + dt * self.scratch[k].value;
                if !v.is_finite() {
                    return Err(Error::NonFinite { location: d.coords(i), value: v });
                }
                vals[i] = v;
            }
        }
        self.u.set_time(t_new);
        self.impose_boundary();
        op.after_update(self.u.values_mut());
        self.steps += 1;
        Ok(())
    }
}

/// One forward-Euler step with `dt = min(dt_cap, dt_max, κ h² / (slope + ε))`.
/// Returns the step taken.
pub fn step(state: &mut EvolutionState, op: &dyn SpatialOperator, ctl: &StepControl, dt_cap: f64) -> Result<f64> {
    let cfl = state.evaluate(op, ctl);
    if cfl < ctl.dt_min {
        return Err(Error::StiffState { dt: cfl, t: state.time() });
    }
    let dt = cfl.min(ctl.dt_max).min(dt_cap);
    let t_new = state.time() + dt;
    state.apply(op, dt, t_new)?;
    Ok(dt)
}

/// Relative slack under which a step is considered to land on its target.
const LANDING: f64 = 1e-12;

/// Advances several states in lockstep with a shared `dt` (the smallest CFL
/// step among them), stopping exactly at each snapshot time and at `t_end`.
///
/// Returns, per state, the snapshots at the requested times in `(t, t_end]`
/// followed by `t_end` if not requested; with `t_end == t` it returns the
/// current state only.
pub fn evolve_many(
    states: &mut [EvolutionState],
    op: &dyn SpatialOperator,
    ctl: &StepControl,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<Vec<Vec<GridFunction>>> {
    let Some(first) = states.first() else { return Ok(Vec::new()) };
    let t0 = first.time();
    if states.iter().any(|s| s.time() != t0) {
        return Err(Error::InvalidArgument("lockstep states must share their time".into()));
    }
    if t_end < t0 {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} before current time {t0}")));
    }
    if snapshot_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("snapshot times must be sorted".into()));
    }
    let mut out: Vec<Vec<GridFunction>> = vec![Vec::new(); states.len()];
    if t_end == t0 {
        for (o, s) in out.iter_mut().zip(states.iter()) {
            o.push(s.u.clone());
        }
        return Ok(out);
    }
    let mut targets: Vec<f64> = snapshot_times.iter().copied().filter(|&s| s > t0 && s <= t_end).collect();
    if targets.last() != Some(&t_end) {
        targets.push(t_end);
    }
    let mut t = t0;
    for &target in &targets {
        while target - t > LANDING * target.abs().max(1.0) {
            let mut cfl = f64::INFINITY;
            for s in states.iter_mut() {
                cfl = cfl.min(s.evaluate(op, ctl));
            }
            if cfl < ctl.dt_min {
                return Err(Error::StiffState { dt: cfl, t });
            }
            let dt = cfl.min(ctl.dt_max).min(target - t);
            let remaining = target - (t + dt);
            let t_new = if remaining <= LANDING * target.abs().max(1.0) { target } else { t + dt };
            for s in states.iter_mut() {
                s.apply(op, dt, t_new)?;
            }
            t = t_new;
        }
        for (o, s) in out.iter_mut().zip(states.iter_mut()) {
            // snap to the requested time in case the slack absorbed a tiny step
            s.u.set_time(target);
            s.snapshot_times.push(target);
            o.push(s.u.clone());
        }
        t = target;
    }
    Ok(out)
}

/// Single-state [`evolve_many`].
pub fn evolve(
    state: &mut EvolutionState,
    op: &dyn SpatialOperator,
    ctl: &StepControl,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<Vec<GridFunction>> {
    let mut out = evolve_many(std::slice::from_mut(state), op, ctl, t_end, snapshot_times)?;
    Ok(out.pop().unwrap_or_default())
}

/// Like [`evolve`], but calls `visit` after every accepted step instead of
/// storing snapshots; used by probes that need every step.
pub fn evolve_with<F>(
    state: &mut EvolutionState,
    op: &dyn SpatialOperator,
    ctl: &StepControl,
    t_end: f64,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&GridFunction),
{
    while t_end - state.time() > LANDING * t_end.abs().max(1.0) {
        let remaining = t_end - state.time();
        step(state, op, ctl, remaining)?;
        if t_end - state.time() <= LANDING * t_end.abs().max(1.0) {
            state.u.set_time(t_end);
        }
        visit(&state.u);
    }
    Ok(())
}
