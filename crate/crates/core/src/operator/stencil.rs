use crate::error::{Error, Result};
use crate::grid::Domain;

/// One orthogonal frame: `n` pairwise orthogonal integer lattice vectors.
pub type Frame = Vec<Vec<i32>>;

/// The set of orthogonal direction frames used by the wide-stencil determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilSet {
    dim: usize,
    width: usize,
    frames: Vec<Frame>,
}

/// Non-axis orthogonal pairs in the plane with max-norm at most `width`.
///
/// Each frame `{a, a⊥}` is listed once, with `a` in the open first quadrant.
fn planar_frames(width: usize) -> Vec<([i32; 2], [i32; 2])> {
    let w = width as i32;
    let mut out = Vec::new();
    for a1 in 1..=w {
        for a2 in 1..=w {
            if gcd(a1, a2) != 1 {
                continue;
            }
            out.push(([a1, a2], [-a2, a1]));
        }
    }
    out
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl StencilSet {
    /// Axis frame plus, for every coordinate pair, each rotated planar frame
    /// embedded in that pair with the remaining axes kept.
    pub fn new(dim: usize, width: usize) -> Result<Self> {
        if !(1..=3).contains(&width) {
            return Err(Error::InvalidArgument(format!("stencil width {width} not in 1..=3")));
        }
        if !(1..=4).contains(&dim) {
            return Err(Error::InvalidArgument(format!("dimension {dim} not in 1..=4")));
        }
        let axis = |k: usize| {
            let mut e = vec![0; dim];
            e[k] = 1;
            e
        };
        let mut frames: Vec<Frame> = vec![(0..dim).map(axis).collect()];
        for i in 0..dim {
            for j in (i + 1)..dim {
                for (a, b) in planar_frames(width) {
                    let mut frame = Vec::with_capacity(dim);
                    let mut ea = vec![0; dim];
                    ea[i] = a[0];
                    ea[j] = a[1];
                    let mut eb = vec![0; dim];
                    eb[i] = b[0];
                    eb[j] = b[1];
                    frame.push(ea);
                    frame.push(eb);
                    frame.extend((0..dim).filter(|&k| k != i && k != j).map(axis));
                    frames.push(frame);
                }
            }
        }
        Ok(Self { dim, width, frames })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// Frames as flat-index offsets with `1 / (|e|² h²)` weights and `|e|²`.
    pub fn compile(&self, domain: &Domain) -> Result<CompiledFrames> {
        if domain.dim() != self.dim {
            return Err(Error::InvalidArgument("stencil and domain dimensions differ".into()));
        }
        if domain.width() < self.width {
            return Err(Error::InvalidArgument(format!(
                "domain band width {} smaller than stencil width {}",
                domain.width(),
                self.width
            )));
        }
        let h2 = domain.spacing() * domain.spacing();
        let frames = self
            .frames
            .iter()
            .map(|f| {
                f.iter()
                    .map(|e| {
                        let len2: i32 = e.iter().map(|c| c * c).sum();
                        StencilDir { offset: domain.offset(e), inv_len2_h2: 1.0 / (len2 as f64 * h2), len2: len2 as f64 }
                    })
                    .collect()
            })
            .collect();
        Ok(CompiledFrames { frames })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StencilDir {
    pub offset: isize,
    pub inv_len2_h2: f64,
    pub len2: f64,
}

#[derive(Debug, Clone)]
pub struct CompiledFrames {
    pub frames: Vec<Vec<StencilDir>>,
}

impl CompiledFrames {
    /// Normalized centered second difference `Δ²_e u(x) / (|e|² h²)`.
    #[inline]
    pub fn second_difference(u: &[f64], node: usize, dir: &StencilDir) -> f64 {
        let c = u[node];
        let a = u[(node as isize + dir.offset) as usize];
        let b = u[(node as isize - dir.offset) as usize];
        (a + b - 2.0 * c) * dir.inv_len2_h2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dot(a: &[i32], b: &[i32]) -> i32 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn frame_counts() {
        assert_eq!(StencilSet::new(2, 1).unwrap().frames().len(), 2);
        assert_eq!(StencilSet::new(2, 2).unwrap().frames().len(), 4);
        assert_eq!(StencilSet::new(2, 3).unwrap().frames().len(), 8);
        // axis + 3 pairs × 1 diagonal frame
        assert_eq!(StencilSet::new(3, 1).unwrap().frames().len(), 4);
    }

    #[test]
    fn frames_are_orthogonal_and_bounded() {
        for dim in 2..=4 {
            for w in 1..=3 {
                let s = StencilSet::new(dim, w).unwrap();
                assert_eq!(s.frames()[0].len(), dim);
                for f in s.frames() {
                    assert_eq!(f.len(), dim);
                    for a in 0..dim {
                        assert!(f[a].iter().all(|c| c.unsigned_abs() as usize <= w));
                        for b in (a + 1)..dim {
                            assert_eq!(dot(&f[a], &f[b]), 0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_width() {
        assert!(StencilSet::new(2, 0).is_err());
        assert!(StencilSet::new(2, 4).is_err());
    }
}
