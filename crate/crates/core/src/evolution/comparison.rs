use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Ordering tolerance of [`comparison_check`].
pub const TOL_ORDER: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub passed: bool,
    /// `max (u − v)` over all nodes and times.
    pub worst_gap: f64,
    pub worst_time: f64,
    pub worst_node: Option<usize>,
}

/// Checks `u <= v + TOL_ORDER` on matching snapshot pairs.
///
/// Requires `u <= v` at the first time and on the boundary band at every time;
/// otherwise the pair is not ordered on the parabolic boundary and the check
/// is meaningless.
pub fn comparison_check(u: &[GridFunction], v: &[GridFunction]) -> Result<ComparisonReport> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::InvalidArgument("snapshot lists must be nonempty and of equal length".into()));
    }
    let mut report = ComparisonReport { passed: true, worst_gap: f64::NEG_INFINITY, worst_time: 0.0, worst_node: None };
    for (k, (a, b)) in u.iter().zip(v).enumerate() {
        if !a.domain().same_lattice(b.domain()) || (a.time() - b.time()).abs() > 1e-12 * a.time().abs().max(1.0) {
            return Err(Error::InvalidArgument(format!("snapshot {k}: grids or times differ")));
        }
        let d = a.domain();
        let parabolic: Box<dyn Iterator<Item = usize>> =
            if k == 0 { Box::new(d.active_nodes()) } else { Box::new(d.band().iter().copied()) };
        for i in parabolic {
            let gap = a.value(i) - b.value(i);
            if gap > TOL_ORDER {
                return Err(Error::NotOrdered { gap, t: a.time() });
            }
        }
        for &i in d.interior() {
            let gap = a.value(i) - b.value(i);
            if gap > report.worst_gap {
                report.worst_gap = gap;
                report.worst_time = a.time();
                report.worst_node = Some(i);
            }
        }
    }
    report.passed = report.worst_gap <= TOL_ORDER;
    Ok(report)
}
