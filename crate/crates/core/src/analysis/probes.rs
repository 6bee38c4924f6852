use crate::error::{Error, Result};
use crate::geometry::{flat_set, FlatSet};
use crate::grid::GridFunction;

use super::fit::ExponentFit;

/// Increments below this count as no motion.
pub const MIN_INCREMENT: f64 = 1e-12;
/// Minimum number of positive snapshot times of a time fit.
pub const HOLDER_MIN_SNAPSHOTS: usize = 6;

/// Log-log fit of `u(x, t_k) − u(x, t_0)` against `t_k − t_0`, where the
/// first snapshot is the reference.
pub fn holder_time_fit(snapshots: &[GridFunction], node: usize) -> Result<ExponentFit> {
    let Some((first, rest)) = snapshots.split_first() else {
        return Err(Error::InsufficientData("no snapshots".into()));
    };
    if rest.len() < HOLDER_MIN_SNAPSHOTS {
        return Err(Error::InsufficientData(format!(
            "{} snapshots after the reference, need {HOLDER_MIN_SNAPSHOTS}",
            rest.len()
        )));
    }
    let mut t = Vec::with_capacity(rest.len());
    let mut inc = Vec::with_capacity(rest.len());
    for u in rest {
        let du = u.value(node) - first.value(node);
        if !(du > MIN_INCREMENT) {
            return Err(Error::NoMotion { node });
        }
        t.push(u.time() - first.time());
        inc.push(du);
    }
    ExponentFit::new(t, inc)
}

/// Default separation threshold `10 h² Λ`: one step's worth of motion at unit Hessian.
pub fn default_separation_eps(spacing: f64, cap_lambda: f64) -> f64 {
    10.0 * spacing * spacing * cap_lambda
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    /// Above `eps` from the first positive-time snapshot on.
    Instant,
    /// First above `eps` at this later time.
    Delayed(f64),
    /// Never above `eps`.
    Persistent,
}

impl Crossing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Instant => "instant",
            Self::Delayed(_) => "delayed",
            Self::Persistent => "persistent",
        }
    }

    pub fn time(&self) -> Option<f64> {
        match self {
            Self::Delayed(t) => Some(*t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub eps: f64,
    pub nodes: Vec<usize>,
    pub crossings: Vec<Crossing>,
    /// Largest value of `u − u(·, t₀)` over the region and all snapshots.
    pub max_rise: f64,
}

impl SeparationReport {
    pub fn count(&self, kind: &str) -> usize {
        self.crossings.iter().filter(|c| c.as_str() == kind).count()
    }

    pub fn all_persistent(&self) -> bool {
        self.crossings.iter().all(|c| matches!(c, Crossing::Persistent))
    }

    pub fn all_moved(&self) -> bool {
        self.crossings.iter().all(|c| !matches!(c, Crossing::Persistent))
    }
}

/// First snapshot time at which each region node exceeds `eps`. Snapshots
/// must be time ordered; times `<= 0` relative to the first snapshot are
/// skipped when deciding "instant".
pub fn separation_probe(snapshots: &[GridFunction], region: &[usize], eps: f64) -> Result<SeparationReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("separation threshold must be positive, got {eps}")));
    }
    if snapshots.windows(2).any(|w| w[0].time() > w[1].time()) {
        return Err(Error::InvalidArgument("snapshots must be time ordered".into()));
    }
    let t0 = snapshots.first().map(|u| u.time()).unwrap_or(0.0);
    let first_positive = snapshots.iter().position(|u| u.time() > t0);
    let mut crossings = Vec::with_capacity(region.len());
    let mut max_rise = f64::NEG_INFINITY;
    for &i in region {
        let mut c = Crossing::Persistent;
        for (k, u) in snapshots.iter().enumerate() {
            max_rise = max_rise.max(u.value(i) - snapshots[0].value(i));
            if matches!(c, Crossing::Persistent) && u.time() > t0 && u.value(i) > eps {
                c = if Some(k) == first_positive { Crossing::Instant } else { Crossing::Delayed(u.time()) };
            }
        }
        crossings.push(c);
    }
    Ok(SeparationReport { eps, nodes: region.to_vec(), crossings, max_rise })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DichotomyOutcome {
    /// The contact set has no segment; nothing to check.
    NoSegment,
    /// Every extremal point lies within `2 h_grid` of the boundary.
    ExtremalOnBoundary,
    /// `u` never left its initial values on the contact set.
    CoincidesWithInitial { max_change: f64 },
    /// Neither alternative holds at these nodes (interior extremal points
    /// where `u` changed); reported for inspection.
    ViolationCandidate { nodes: Vec<usize>, max_change: f64 },
}

impl DichotomyOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::NoSegment => "no-segment",
            Self::ExtremalOnBoundary => "extremal-on-boundary",
            Self::CoincidesWithInitial { .. } => "coincides-with-initial",
            Self::ViolationCandidate { .. } => "violation-candidate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyReport {
    pub flat: FlatSet,
    pub outcome: DichotomyOutcome,
}

/// Contact set of the final snapshot with `l(x) = a·x + c`, classified by
/// whether its extremal points reach the boundary or `u` kept its initial
/// values there (to `eps_flat`).
pub fn flat_dichotomy_probe(
    snapshots: &[GridFunction],
    a: &[f64],
    c: f64,
    tol: f64,
    eps_flat: f64,
) -> Result<DichotomyReport> {
    let (Some(first), Some(last)) = (snapshots.first(), snapshots.last()) else {
        return Err(Error::InsufficientData("no snapshots".into()));
    };
    let flat = flat_set(last, a, c, tol)?;
    if !flat.contains_segment {
        return Ok(DichotomyReport { flat, outcome: DichotomyOutcome::NoSegment });
    }
    let d = last.domain();
    let reach = 2.0 * d.spacing();
    let interior_ext: Vec<usize> =
        flat.extremal.iter().copied().filter(|&i| d.distance_to_boundary(&d.coords(i)) > reach).collect();
    if interior_ext.is_empty() {
        return Ok(DichotomyReport { flat, outcome: DichotomyOutcome::ExtremalOnBoundary });
    }
    let change = |i: usize| (last.value(i) - first.value(i)).abs();
    let max_change = flat.nodes.iter().map(|&i| change(i)).fold(0.0, f64::max);
    let outcome = if max_change <= eps_flat {
        DichotomyOutcome::CoincidesWithInitial { max_change }
    } else {
        let nodes = flat.nodes.iter().copied().filter(|&i| change(i) > eps_flat).collect();
        DichotomyOutcome::ViolationCandidate { nodes, max_change }
    };
    Ok(DichotomyReport { flat, outcome })
}
