//! Analytic descriptions of convex spatial domains.

/// A half-space `{x : normal · x <= offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }
}

/// Membership description of a spatial domain.
///
/// `Union` exists so that nonconvex inputs can be expressed (and rejected by
/// [`crate::grid::build_domain`]); every other variant is convex by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Intersection of half-spaces.
    HalfSpaces(Vec<HalfSpace>),
    /// `{x : (x - c)ᵀ Q (x - c) <= 1}` with `Q` symmetric positive definite, row-major.
    Ellipsoid { center: Vec<f64>, quadratic: Vec<f64> },
    Union(Vec<Shape>),
}

impl Shape {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Shape::Ball { center, radius }
    }

    pub fn unit_ball(dim: usize) -> Self {
        Shape::Ball { center: vec![0.0; dim], radius: 1.0 }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Shape::Box { lower: vec![lo; dim], upper: vec![hi; dim] }
    }

    /// Dimension implied by the description, if any.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Shape::Ball { center, .. } => Some(center.len()),
            Shape::Box { lower, .. } => Some(lower.len()),
            Shape::HalfSpaces(hs) => hs.first().map(|h| h.normal.len()),
            Shape::Ellipsoid { center, .. } => Some(center.len()),
            Shape::Union(parts) => parts.iter().find_map(Shape::dimension),
        }
    }

    /// Signed level function: negative strictly inside, zero on the boundary.
    ///
    /// For balls, boxes and half-space lists this is the (max-of-planes) signed
    /// distance; for ellipsoids it is only sign-correct.
    pub fn level(&self, x: &[f64]) -> f64 {
        match self {
            Shape::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                d2.sqrt() - radius
            }
            Shape::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&xi, (&lo, &hi))| (lo - xi).max(xi - hi))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::HalfSpaces(hs) => hs
                .iter()
                .map(|h| {
                    let norm = h.normal.iter().map(|a| a * a).sum::<f64>().sqrt();
                    let dot: f64 = h.normal.iter().zip(x).map(|(a, b)| a * b).sum();
                    (dot - h.offset) / norm
                })
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Ellipsoid { center, quadratic } => {
                let n = center.len();
                let mut q = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        q += (x[i] - center[i]) * quadratic[i * n + j] * (x[j] - center[j]);
                    }
                }
                q.max(0.0).sqrt() - 1.0
            }
            Shape::Union(parts) => parts.iter().map(|s| s.level(x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Closed-set membership with a small absolute slack.
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        self.level(x) <= slack
    }

    /// Strict interior membership: the level must be below `-slack`.
    pub fn contains_strictly(&self, x: &[f64], slack: f64) -> bool {
        self.level(x) < -slack
    }

    /// Axis-aligned box containing the set, when the description bounds it.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Shape::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            Shape::Box { lower, upper } => Some((lower.clone(), upper.clone())),
            Shape::Ellipsoid { center, quadratic } => {
                // Half-widths are sqrt of the diagonal of Q^{-1}.
                let n = center.len();
                let q = nalgebra::DMatrix::from_row_slice(n, n, quadratic);
                let inv = q.try_inverse()?;
                let half: Vec<f64> = (0..n).map(|i| inv[(i, i)].max(0.0).sqrt()).collect();
                Some((
                    center.iter().zip(&half).map(|(c, w)| c - w).collect(),
                    center.iter().zip(&half).map(|(c, w)| c + w).collect(),
                ))
            }
            Shape::Union(parts) => {
                let mut acc: Option<(Vec<f64>, Vec<f64>)> = None;
                for p in parts {
                    let (lo, hi) = p.bounding_box()?;
                    acc = Some(match acc {
                        None => (lo, hi),
                        Some((alo, ahi)) => (
                            alo.iter().zip(&lo).map(|(a, b)| a.min(*b)).collect(),
                            ahi.iter().zip(&hi).map(|(a, b)| a.max(*b)).collect(),
                        ),
                    });
                }
                acc
            }
            Shape::HalfSpaces(_) => None,
        }
    }
}
