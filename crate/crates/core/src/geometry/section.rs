use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::csv::fmt_real;
use crate::grid::{GridFunction, NodeClass};

/// Relative membership slack of sections.
pub const TOL_SECTION_RELATIVE: f64 = 1e-9;

/// Damping of the centering iteration.
pub const CENTERING_DAMPING: f64 = 0.5;
pub const CENTERING_MAX_ITER: usize = 200;

/// Sub-level set `{y : u(y) <= u(x₀) + p·(y − x₀) + h}` on the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub base: usize,
    pub height: f64,
    pub slope: Vec<f64>,
    /// Interior member nodes, ascending.
    pub nodes: Vec<usize>,
    /// Mean position of the member nodes.
    pub center: Vec<f64>,
    pub time: f64,
    /// Some boundary-band node also satisfies the inequality.
    pub touches_boundary: bool,
}

impl Section {
    pub fn points(&self, u: &GridFunction) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|&i| u.domain().coords(i)).collect()
    }

    /// Node indices, one per row, after a header with the scalars.
    pub fn write_csv<W: Write>(&self, u: &GridFunction, out: &mut W) -> Result<()> {
        let n = self.slope.len();
        let mut head = vec!["base".to_string(), "height".into(), "t".into(), "touches_boundary".into()];
        head.extend((1..=n).map(|k| format!("slope_{k}")));
        head.extend((1..=n).map(|k| format!("center_{k}")));
        writeln!(out, "{}", head.join(","))?;
        let mut row = vec![self.base.to_string(), fmt_real(self.height), fmt_real(self.time)];
        row.push(self.touches_boundary.to_string());
        row.extend(self.slope.iter().map(|v| fmt_real(*v)));
        row.extend(self.center.iter().map(|v| fmt_real(*v)));
        writeln!(out, "{}", row.join(","))?;
        let cols: Vec<String> = std::iter::once("node".to_string()).chain((1..=n).map(|k| format!("x_{k}"))).collect();
        writeln!(out, "{}", cols.join(","))?;
        for &i in &self.nodes {
            let x = u.domain().coords(i);
            let coords: Vec<String> = x.iter().map(|v| fmt_real(*v)).collect();
            writeln!(out, "{},{}", i, coords.join(","))?;
        }
        Ok(())
    }
}

/// The section of `u` at `x₀` with height `h` and slope `p`.
pub fn section_at(u: &GridFunction, x0: usize, h: f64, slope: &[f64]) -> Result<Section> {
    let d = u.domain();
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("section height must be positive, got {h}")));
    }
    if slope.len() != d.dim() {
        return Err(Error::InvalidArgument("slope dimension mismatch".into()));
    }
    if !d.is_active(x0) {
        return Err(Error::InvalidArgument("base node is not active".into()));
    }
    let tol = TOL_SECTION_RELATIVE * u.scale().max(1.0);
    let base = d.coords(x0);
    let u0 = u.value(x0);
    let n = d.dim();
    let mut y = vec![0.0; n];
    let mut nodes = Vec::new();
    let mut center = vec![0.0; n];
    let mut touches = false;
    for i in d.active_nodes() {
        d.coords_into(i, &mut y);
        let plane: f64 = u0 + slope.iter().zip(y.iter().zip(&base)).map(|(p, (a, b))| p * (a - b)).sum::<f64>() + h;
        if u.value(i) > plane + tol {
            continue;
        }
        if d.class(i) == NodeClass::Interior {
            nodes.push(i);
            for k in 0..n {
                center[k] += y[k];
            }
        } else if d.mirror_partner(i).is_none() {
            touches = true;
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptySection(format!("no node within height {h}")));
    }
    let m = nodes.len() as f64;
    center.iter_mut().for_each(|c| *c /= m);
    Ok(Section { base: x0, height: h, slope: slope.to_vec(), nodes, center, time: u.time(), touches_boundary: touches })
}

fn covariance(points: &[Vec<f64>], center: &[f64]) -> DMatrix<f64> {
    let n = center.len();
    let mut s = DMatrix::zeros(n, n);
    for x in points {
        for a in 0..n {
            for b in 0..n {
                s[(a, b)] += (x[a] - center[a]) * (x[b] - center[b]);
            }
        }
    }
    s / points.len() as f64
}

/// A section whose center of mass is `x₀` up to `2 h_grid`, found by the
/// damped slope update `p ← p + κ K (x₀ − x*)`, `K = (2h/(n+2)) Σ⁻¹`.
///
/// `K` is the Hessian that would produce the observed covariance `Σ` if the
/// section were an ellipsoid of a quadratic, so the update is a Newton step
/// for quadratics.
pub fn centered_section(u: &GridFunction, x0: usize, h: f64) -> Result<Section> {
    let d = u.domain();
    let n = d.dim();
    let spacing = d.spacing();
    let base = d.coords(x0);
    // initial slope: centered-difference gradient
    let mut slope: Vec<f64> = (0..n)
        .map(|k| {
            let mut e = vec![0; n];
            e[k] = 1;
            let fwd = d.neighbor(x0, &e).filter(|&j| d.is_active(j));
            e[k] = -1;
            let back = d.neighbor(x0, &e).filter(|&j| d.is_active(j));
            match (fwd, back) {
                (Some(a), Some(b)) => (u.value(a) - u.value(b)) / (2.0 * spacing),
                _ => 0.0,
            }
        })
        .collect();
    let mut best: Option<(f64, Section)> = None;
    for _ in 0..CENTERING_MAX_ITER {
        let s = section_at(u, x0, h, &slope)?;
        if s.touches_boundary {
            return Err(Error::SectionTouchesBoundary);
        }
        let offset: Vec<f64> = base.iter().zip(&s.center).map(|(a, b)| a - b).collect();
        let residual = offset.iter().map(|v| v * v).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, s.clone()));
        }
        if residual <= 2.0 * spacing {
            break;
        }
        let pts = s.points(u);
        let sigma = covariance(&pts, &s.center);
        let Some(inv) = sigma.clone().try_inverse().filter(|_| sigma.determinant() > 0.0) else {
            // section too thin to invert; fall back to a scalar stiffness
            let k = 2.0 * h / ((n + 2) as f64 * (sigma.trace() / n as f64).max(spacing * spacing));
            for (p, o) in slope.iter_mut().zip(&offset) {
                *p += CENTERING_DAMPING * k * o;
            }
            continue;
        };
        let k = inv * (2.0 * h / (n + 2) as f64);
        let step = k * DVector::from_vec(offset);
        for (p, s) in slope.iter_mut().zip(step.iter()) {
            *p += CENTERING_DAMPING * s;
        }
    }
    let (residual, s) = best.ok_or(Error::CenteringFailed { iterations: 0, residual: f64::INFINITY })?;
    if residual > 2.0 * spacing {
        return Err(Error::CenteringFailed { iterations: CENTERING_MAX_ITER, residual });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::grid::{build_domain, sample, Domain, Shape};

    fn disk(r: f64, h: f64) -> Arc<Domain> {
        Arc::new(build_domain(Shape::ball(vec![0.0, 0.0], r), h, 1).unwrap())
    }

    #[test]
    fn paraboloid_section_is_unit_disk_nodes() {
        let d = disk(2.0, 0.1);
        let u = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let o = d.nearest_node(&[0.0, 0.0]).unwrap();
        let s = section_at(&u, o, 0.5, &[0.0, 0.0]).unwrap();
        let expect: Vec<usize> = d
            .interior()
            .iter()
            .copied()
            .filter(|&i| {
                let x = d.coords(i);
                x[0] * x[0] + x[1] * x[1] <= 1.0 + 1e-9
            })
            .collect();
        assert_eq!(s.nodes, expect);
        assert!(!s.touches_boundary);
    }

    #[test]
    fn cone_section_is_a_disk_of_radius_h() {
        let d = disk(1.0, 0.05);
        let u = sample(&d, 0.0, |x| (x[0] * x[0] + x[1] * x[1]).sqrt()).unwrap();
        let o = d.nearest_node(&[0.0, 0.0]).unwrap();
        let s = section_at(&u, o, 0.3, &[0.0, 0.0]).unwrap();
        for &i in &s.nodes {
            let x = d.coords(i);
            assert!((x[0] * x[0] + x[1] * x[1]).sqrt() <= 0.3 + 1e-9);
        }
        // the x-axis nodes of [−0.3, 0.3]
        let on_axis = s.nodes.iter().filter(|&&i| d.coords(i)[1].abs() < 1e-12).count();
        assert_eq!(on_axis, 13);
    }

    #[test]
    fn sections_nest() {
        let d = disk(1.0, 0.05);
        let u = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let o = d.nearest_node(&[0.0, 0.0]).unwrap();
        let big = section_at(&u, o, 0.08, &[0.1, -0.2]).unwrap();
        let small = section_at(&u, o, 0.02, &[0.1, -0.2]).unwrap();
        assert!(small.nodes.iter().all(|i| big.nodes.binary_search(i).is_ok()));
    }

    #[test]
    fn empty_section_errors() {
        let d = disk(1.0, 0.1);
        let u = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        // a band base point with a steep outward slope leaves no interior node below the plane
        let edge = d.band().iter().copied().find(|&i| d.coords(i)[1].abs() < 1e-12 && d.coords(i)[0] > 0.0).unwrap();
        assert!(matches!(section_at(&u, edge, 1e-3, &[5.0, 0.0]), Err(Error::EmptySection(_))));
    }

    #[test]
    fn tilted_paraboloid_recenters() {
        let d = disk(2.0, 0.05);
        let u = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]) + x[0]).unwrap();
        let o = d.nearest_node(&[0.0, 0.0]).unwrap();
        let s = centered_section(&u, o, 0.3).unwrap();
        // analytic sub-level set {½|y|² + (1 − p₁)y₁ − p₂y₂ <= h} is centered at (p₁ − 1, p₂)
        assert!((s.slope[0] - 1.0).abs() <= 2.0 * 0.05 && s.slope[1].abs() <= 2.0 * 0.05, "{:?}", s.slope);
        assert!(s.center.iter().map(|c| c * c).sum::<f64>().sqrt() <= 0.1);
    }

    #[test]
    fn symmetric_flat_bottom_needs_no_tilt() {
        let d = disk(2.0, 0.05);
        let u = sample(&d, 0.0, |x| ((x[0] * x[0] + x[1] * x[1]).sqrt() - 0.5).max(0.0)).unwrap();
        let o = d.nearest_node(&[0.0, 0.0]).unwrap();
        let s = centered_section(&u, o, 0.2).unwrap();
        assert!(s.slope.iter().all(|p| p.abs() < 1e-12));
    }

    #[test]
    fn boundary_touching_section_is_not_centered() {
        let d = disk(1.0, 0.05);
        let u = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let o = d.nearest_node(&[0.0, 0.0]).unwrap();
        assert!(matches!(centered_section(&u, o, 2.0), Err(Error::SectionTouchesBoundary)));
    }
}
