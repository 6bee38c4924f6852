use super::shape::Shape;
use crate::error::{Error, Result};

/// Classification of a lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Exterior,
    /// Non-interior node within stencil reach of an interior node; carries boundary data.
    Band,
    Interior,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Exterior => "exterior",
            NodeClass::Band => "band",
            NodeClass::Interior => "interior",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exterior" => Some(NodeClass::Exterior),
            "band" => Some(NodeClass::Band),
            "interior" => Some(NodeClass::Interior),
            _ => None,
        }
    }
}

/// Slack used when deciding strict interior membership of a node.
const MEMBERSHIP_SLACK: f64 = 1e-12;

/// A uniform lattice over an axis-aligned bounding box, padded by the stencil
/// width on every side, with every node classified against a convex set.
#[derive(Debug, Clone)]
pub struct Domain {
    dim: usize,
    spacing: f64,
    width: usize,
    box_lower: Vec<f64>,
    box_upper: Vec<f64>,
    counts: Vec<usize>,
    strides: Vec<usize>,
    classes: Vec<NodeClass>,
    interior: Vec<usize>,
    band: Vec<usize>,
    shape: Option<Shape>,
    mirror_axis: Option<usize>,
}

/// Builds a domain from a convex-set description using the description's own
/// bounding box.
pub fn build_domain(shape: Shape, spacing: f64, width: usize) -> Result<Domain> {
    let (lo, hi) = shape.bounding_box().ok_or_else(|| {
        Error::InvalidArgument("shape is unbounded; supply an explicit bounding box".into())
    })?;
    Domain::build_with_box(shape, lo, hi, spacing, width)
}

impl Domain {
    pub fn build_with_box(
        shape: Shape,
        lower: Vec<f64>,
        upper: Vec<f64>,
        spacing: f64,
        width: usize,
    ) -> Result<Domain> {
        let dim = lower.len();
        if !(1..=4).contains(&dim) || upper.len() != dim {
            return Err(Error::InvalidArgument(format!("dimension {dim} outside 1..=4")));
        }
        if let Some(sd) = shape.dimension() {
            if sd != dim {
                return Err(Error::InvalidArgument(format!(
                    "shape dimension {sd} does not match bounding box dimension {dim}"
                )));
            }
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidArgument(format!("h_grid must be positive, got {spacing}")));
        }
        if width == 0 {
            return Err(Error::InvalidArgument("stencil width must be at least 1".into()));
        }
        let counts: Vec<usize> = lower
            .iter()
            .zip(&upper)
            .map(|(lo, hi)| ((hi - lo) / spacing).round().max(0.0) as usize + 1 + 2 * width)
            .collect();
        let strides = strides_for(&counts);
        let total: usize = counts.iter().product();

        let mut is_interior = vec![false; total];
        let mut x = vec![0.0; dim];
        for (i, flag) in is_interior.iter_mut().enumerate() {
            coords_into(i, &counts, &lower, spacing, width, &mut x);
            let in_box = x
                .iter()
                .zip(lower.iter().zip(&upper))
                .all(|(xi, (lo, hi))| *xi >= lo - MEMBERSHIP_SLACK && *xi <= hi + MEMBERSHIP_SLACK);
            *flag = in_box && shape.contains_strictly(&x, MEMBERSHIP_SLACK);
        }
        let classes = classify(&is_interior, &counts, &strides, width);
        let domain = Domain::assemble(dim, spacing, width, lower, upper, counts, classes, Some(shape), None)?;
        domain.check_convex_by_sampling()?;
        Ok(domain)
    }

    /// Rebuilds a domain from a stored classification table (no analytic shape).
    #[allow(clippy::too_many_arguments)]
    pub fn from_classes(
        dim: usize,
        spacing: f64,
        width: usize,
        box_lower: Vec<f64>,
        box_upper: Vec<f64>,
        counts: Vec<usize>,
        classes: Vec<NodeClass>,
        mirror_axis: Option<usize>,
    ) -> Result<Domain> {
        Domain::assemble(dim, spacing, width, box_lower, box_upper, counts, classes, None, mirror_axis)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        dim: usize,
        spacing: f64,
        width: usize,
        box_lower: Vec<f64>,
        box_upper: Vec<f64>,
        counts: Vec<usize>,
        classes: Vec<NodeClass>,
        shape: Option<Shape>,
        mirror_axis: Option<usize>,
    ) -> Result<Domain> {
        let strides = strides_for(&counts);
        if classes.len() != counts.iter().product::<usize>() {
            return Err(Error::InvalidArgument("class table does not match lattice size".into()));
        }
        let interior: Vec<usize> =
            (0..classes.len()).filter(|&i| classes[i] == NodeClass::Interior).collect();
        let band: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == NodeClass::Band).collect();
        if interior.is_empty() {
            return Err(Error::DegenerateDomain("no interior lattice nodes".into()));
        }
        let domain = Domain {
            dim,
            spacing,
            width,
            box_lower,
            box_upper,
            counts,
            strides,
            classes,
            interior,
            band,
            shape,
            mirror_axis,
        };
        // Every interior stencil read must land on a classified node.
        for &i in &domain.interior {
            let mi = domain.multi_index(i);
            if mi.iter().zip(&domain.counts).any(|(&k, &c)| k < width || k + width >= c) {
                return Err(Error::DegenerateDomain("interior node without full stencil".into()));
            }
        }
        Ok(domain)
    }

    /// Axisymmetric reduced domain in `(r, y)` coordinates: `r ∈ [0, r_max]`,
    /// `y ∈ [y_lo, y_hi]`. Nodes on the axis `r = 0` are interior; ghost nodes with
    /// `r < 0` are band nodes whose values mirror `r > 0`.
    pub fn axisymmetric(r_max: f64, y_lo: f64, y_hi: f64, spacing: f64, width: usize) -> Result<Domain> {
        let shape = Shape::Box { lower: vec![-0.5 * spacing, y_lo], upper: vec![r_max, y_hi] };
        let mut d = Domain::build_with_box(shape, vec![0.0, y_lo], vec![r_max, y_hi], spacing, width)?;
        d.mirror_axis = Some(0);
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn box_lower(&self) -> &[f64] {
        &self.box_lower
    }

    pub fn box_upper(&self) -> &[f64] {
        &self.box_upper
    }

    /// Total number of lattice nodes, including exterior ones.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.classes[node]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn band(&self) -> &[usize] {
        &self.band
    }

    pub fn shape(&self) -> Option<&Shape> {
        self.shape.as_ref()
    }

    pub fn mirror_axis(&self) -> Option<usize> {
        self.mirror_axis
    }

    /// Interior followed by band nodes.
    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.interior.iter().chain(self.band.iter()).copied()
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.classes[node] != NodeClass::Exterior
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let mut rest = node;
        let mut mi = vec![0; self.dim];
        for k in (0..self.dim).rev() {
            mi[k] = rest / self.strides[k];
            rest %= self.strides[k];
        }
        mi
    }

    pub fn index(&self, multi: &[usize]) -> Option<usize> {
        if multi.len() != self.dim || multi.iter().zip(&self.counts).any(|(m, c)| m >= c) {
            return None;
        }
        Some(multi.iter().zip(&self.strides).map(|(m, s)| m * s).sum())
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.coords_into(node, &mut x);
        x
    }

    pub fn coords_into(&self, node: usize, out: &mut [f64]) {
        coords_into(node, &self.counts, &self.box_lower, self.spacing, self.width, out);
    }

    /// Coordinate of lattice index `k` along `axis`.
    pub fn axis_coord(&self, axis: usize, k: usize) -> f64 {
        self.box_lower[axis] + (k as f64 - self.width as f64) * self.spacing
    }

    /// Flat-index offset of an integer direction.
    pub fn offset(&self, dir: &[i32]) -> isize {
        dir.iter().zip(&self.strides).map(|(&d, &s)| d as isize * s as isize).sum()
    }

    /// Neighbor of `node` along `dir`, if it lies on the lattice.
    pub fn neighbor(&self, node: usize, dir: &[i32]) -> Option<usize> {
        let mi = self.multi_index(node);
        let mut out = Vec::with_capacity(self.dim);
        for (k, &d) in dir.iter().enumerate() {
            let v = mi[k] as i64 + d as i64;
            if v < 0 || v >= self.counts[k] as i64 {
                return None;
            }
            out.push(v as usize);
        }
        self.index(&out)
    }

    /// Lattice node nearest to `x` (may be exterior), if `x` lies on the lattice extent.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        let mut mi = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let f = (x[k] - self.box_lower[k]) / self.spacing + self.width as f64;
            let r = f.round();
            if r < 0.0 || r >= self.counts[k] as f64 {
                return None;
            }
            mi.push(r as usize);
        }
        self.index(&mi)
    }

    /// Mirror partner of a ghost node across the symmetry axis.
    pub fn mirror_partner(&self, node: usize) -> Option<usize> {
        let axis = self.mirror_axis?;
        let mut mi = self.multi_index(node);
        let origin = self.width; // lattice index of coordinate 0 (box lower is 0 on the axis)
        if mi[axis] >= origin {
            return None;
        }
        mi[axis] = 2 * origin - mi[axis];
        self.index(&mi)
    }

    /// True when both domains share lattice geometry and node classification.
    pub fn same_lattice(&self, other: &Domain) -> bool {
        self.dim == other.dim
            && self.spacing == other.spacing
            && self.width == other.width
            && self.counts == other.counts
            && self.box_lower == other.box_lower
            && self.classes == other.classes
    }

    /// Euclidean distance from `x` to the nearest non-interior active node, a
    /// lattice proxy for the distance to the domain boundary.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        let mut y = vec![0.0; self.dim];
        for &b in &self.band {
            // Mirror ghosts are not part of the physical boundary.
            if self.mirror_partner(b).is_some() {
                continue;
            }
            self.coords_into(b, &mut y);
            let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.min(d2);
        }
        best.sqrt()
    }

    fn check_convex_by_sampling(&self) -> Result<()> {
        let Some(shape) = &self.shape else { return Ok(()) };
        // Sample set: strided interior nodes plus extreme nodes along axis and
        // diagonal directions, where nonconvexity is most visible.
        let mut picks: Vec<usize> = Vec::new();
        let stride = (self.interior.len() / 48).max(1);
        picks.extend(self.interior.iter().step_by(stride).copied());
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for k in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[k] = 1.0;
            dirs.push(e.clone());
            e[k] = -1.0;
            dirs.push(e);
        }
        for a in 0..self.dim {
            for b in (a + 1)..self.dim {
                for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut e = vec![0.0; self.dim];
                    e[a] = sa;
                    e[b] = sb;
                    dirs.push(e);
                }
            }
        }
        let mut x = vec![0.0; self.dim];
        for d in &dirs {
            let mut best = (f64::NEG_INFINITY, self.interior[0]);
            for &i in &self.interior {
                self.coords_into(i, &mut x);
                let v: f64 = x.iter().zip(d).map(|(a, b)| a * b).sum();
                if v > best.0 {
                    best = (v, i);
                }
            }
            picks.push(best.1);
        }
        picks.sort_unstable();
        picks.dedup();

        let pts: Vec<Vec<f64>> = picks.iter().map(|&i| self.coords(i)).collect();
        let mut z = vec![0.0; self.dim];
        for a in 0..pts.len() {
            for b in (a + 1)..pts.len() {
                let len: f64 =
                    pts[a].iter().zip(&pts[b]).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                let steps = ((2.0 * len / self.spacing).ceil() as usize).max(1);
                for s in 1..steps {
                    let lam = s as f64 / steps as f64;
                    for k in 0..self.dim {
                        z[k] = (1.0 - lam) * pts[a][k] + lam * pts[b][k];
                    }
                    if !shape.contains(&z, 1e-9) {
                        return Err(Error::NonconvexDomain(format!(
                            "segment between {:?} and {:?} leaves the set at {:?}",
                            pts[a], pts[b], z
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn strides_for(counts: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; counts.len()];
    for k in 1..counts.len() {
        strides[k] = strides[k - 1] * counts[k - 1];
    }
    strides
}

fn coords_into(node: usize, counts: &[usize], lower: &[f64], spacing: f64, width: usize, out: &mut [f64]) {
    let mut rest = node;
    for k in 0..counts.len() {
        let ik = rest % counts[k];
        rest /= counts[k];
        out[k] = lower[k] + (ik as f64 - width as f64) * spacing;
    }
}

fn classify(is_interior: &[bool], counts: &[usize], strides: &[usize], width: usize) -> Vec<NodeClass> {
    let dim = counts.len();
    let mut classes: Vec<NodeClass> =
        is_interior.iter().map(|&b| if b { NodeClass::Interior } else { NodeClass::Exterior }).collect();
    // All offsets in [-W, W]^n.
    let side = 2 * width + 1;
    let n_offsets = side.pow(dim as u32);
    for i in 0..is_interior.len() {
        if !is_interior[i] {
            continue;
        }
        let mut rest = i;
        let mut mi = [0usize; 4];
        for k in 0..dim {
            mi[k] = rest % counts[k];
            rest /= counts[k];
        }
        for o in 0..n_offsets {
            let mut r = o;
            let mut idx: isize = 0;
            let mut ok = true;
            for k in 0..dim {
                let d = (r % side) as isize - width as isize;
                r /= side;
                let v = mi[k] as isize + d;
                if v < 0 || v >= counts[k] as isize {
                    ok = false;
                    break;
                }
                idx += v * strides[k] as isize;
            }
            if ok && classes[idx as usize] == NodeClass::Exterior {
                classes[idx as usize] = NodeClass::Band;
            }
        }
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::shape::HalfSpace;

    #[test]
    fn unit_disk_interior_count_matches_area() {
        let d = build_domain(Shape::unit_ball(2), 0.1, 1).unwrap();
        let expected = std::f64::consts::PI / 0.01;
        let got = d.interior().len() as f64;
        assert!((got - expected).abs() / expected < 0.05, "{got} vs {expected}");
    }

    #[test]
    fn box_interior_is_three_by_three() {
        let d = build_domain(Shape::cube(2, -1.0, 1.0), 0.5, 1).unwrap();
        assert_eq!(d.interior().len(), 9);
        // the 5x5 box lattice minus its interior forms the band
        assert_eq!(d.band().len(), 16);
    }

    #[test]
    fn nonconvex_union_rejected() {
        let shape = Shape::Union(vec![
            Shape::HalfSpaces(vec![HalfSpace::new(vec![1.0, 0.0], -0.5)]),
            Shape::HalfSpaces(vec![HalfSpace::new(vec![0.0, 1.0], -0.5)]),
        ]);
        let err = Domain::build_with_box(shape, vec![-1.0, -1.0], vec![1.0, 1.0], 0.1, 1).unwrap_err();
        assert!(matches!(err, Error::NonconvexDomain(_)), "{err}");
    }

    #[test]
    fn empty_interior_rejected() {
        let err = build_domain(Shape::ball(vec![0.0, 0.0], 0.01), 0.1, 1).unwrap_err();
        assert!(matches!(err, Error::DegenerateDomain(_)));
    }

    #[test]
    fn classification_is_a_partition_with_full_stencils() {
        let d = build_domain(Shape::unit_ball(3), 0.2, 2).unwrap();
        let n_int = d.classes().iter().filter(|c| **c == NodeClass::Interior).count();
        let n_band = d.classes().iter().filter(|c| **c == NodeClass::Band).count();
        let n_ext = d.classes().iter().filter(|c| **c == NodeClass::Exterior).count();
        assert_eq!(n_int + n_band + n_ext, d.len());
        for &i in d.interior() {
            for dx in -2..=2 {
                for dy in -2..=2 {
                    for dz in -2..=2 {
                        let j = d.neighbor(i, &[dx, dy, dz]).unwrap();
                        assert_ne!(d.class(j), NodeClass::Exterior);
                    }
                }
            }
        }
    }

    #[test]
    fn interior_status_survives_refinement() {
        for shape in [Shape::unit_ball(2), Shape::cube(2, -1.0, 1.0)] {
            let coarse = build_domain(shape.clone(), 0.1, 1).unwrap();
            let fine = build_domain(shape, 0.05, 1).unwrap();
            for i in 0..coarse.len() {
                let x = coarse.coords(i);
                // the coarse padding reaches past the fine lattice
                let Some(j) = fine.nearest_node(&x) else { continue };
                let y = fine.coords(j);
                assert_eq!(x, y);
                let ci = coarse.class(i) == NodeClass::Interior;
                let fi = fine.class(j) == NodeClass::Interior;
                assert_eq!(ci, fi, "node {x:?}");
            }
        }
    }

    #[test]
    fn axisymmetric_mirror_partners() {
        let d = Domain::axisymmetric(1.0, -1.0, 1.0, 0.1, 2).unwrap();
        let axis_node = d.nearest_node(&[0.0, 0.3]).unwrap();
        assert_eq!(d.class(axis_node), NodeClass::Interior);
        let ghost = d.nearest_node(&[-0.2, 0.3]).unwrap();
        assert_eq!(d.class(ghost), NodeClass::Band);
        let partner = d.mirror_partner(ghost).unwrap();
        let x = d.coords(partner);
        assert!((x[0] - 0.2).abs() < 1e-12 && (x[1] - 0.3).abs() < 1e-12);
    }
}
