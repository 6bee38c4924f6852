use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Angle tolerance below which a hull vertex counts as collinear.
pub const TOL_COLLINEAR: f64 = 1e-6;

const DIRECTIONS_2D: usize = 360;
const DIRECTIONS_3D: usize = 2000;
const DIRECTIONS_4D: usize = 4000;
const DIRECTION_SEED: u64 = 0x5eed_d1ec;

/// Unit directions used for support-function constraints: both axis signs in
/// 1-D, equally spaced angles in 2-D, a Fibonacci sphere in 3-D and seeded
/// Gaussian samples in higher dimensions. Axis directions are always included.
pub fn sample_directions(n: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    match n {
        0 => return out,
        1 => return vec![vec![1.0], vec![-1.0]],
        2 => {
            for k in 0..DIRECTIONS_2D {
                let a = 2.0 * std::f64::consts::PI * k as f64 / DIRECTIONS_2D as f64;
                out.push(vec![a.cos(), a.sin()]);
            }
            return out;
        }
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for k in 0..DIRECTIONS_3D {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / DIRECTIONS_3D as f64;
                let r = (1.0 - z * z).sqrt();
                let a = golden * k as f64;
                out.push(vec![r * a.cos(), r * a.sin(), z]);
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(DIRECTION_SEED);
            while out.len() < DIRECTIONS_4D {
                let v: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm > 1e-8 {
                    out.push(v.into_iter().map(|c| c / norm).collect());
                }
            }
        }
    }
    for k in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[k] = s;
            out.push(e);
        }
    }
    out
}

/// Standard normal sample by the Box-Muller transform.
pub(crate) fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Support function `max_x a·x` of a point cloud.
pub fn support(points: &[Vec<f64>], a: &[f64]) -> f64 {
    points.iter().map(|x| dot(x, a)).fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise vertex indices of the planar convex hull (monotone
/// chain), with vertices whose turning angle is below [`TOL_COLLINEAR`]
/// removed. Degenerate inputs give one or two vertices.
pub fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| points[i][0].total_cmp(&points[j][0]).then(points[i][1].total_cmp(&points[j][1])));
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() <= 2 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 { Box::new(idx.iter()) } else { Box::new(idx.iter().rev()) };
        for &i in iter {
            while hull.len() >= start + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if cross(&points[a], &points[b], &points[i]) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        hull.pop();
    }
    prune_collinear(points, hull)
}

fn prune_collinear(points: &[Vec<f64>], mut hull: Vec<usize>) -> Vec<usize> {
    loop {
        let m = hull.len();
        if m <= 2 {
            return hull;
        }
        let flat = (0..m).find(|&k| {
            let (a, b, c) = (&points[hull[(k + m - 1) % m]], &points[hull[k]], &points[hull[(k + 1) % m]]);
            let e1 = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let e2 = ((c[0] - b[0]).powi(2) + (c[1] - b[1]).powi(2)).sqrt();
            cross(a, b, c).abs() <= TOL_COLLINEAR * e1 * e2
        });
        match flat {
            Some(k) => {
                hull.remove(k);
            }
            None => return hull,
        }
    }
}

/// Indices of extremal points: exact hull vertices in 1-D and 2-D, support
/// maximizers over [`sample_directions`] in higher dimensions.
pub fn extremal_points(points: &[Vec<f64>]) -> Vec<usize> {
    let Some(first) = points.first() else { return Vec::new() };
    match first.len() {
        1 => {
            let lo = (0..points.len()).min_by(|&i, &j| points[i][0].total_cmp(&points[j][0])).unwrap_or(0);
            let hi = (0..points.len()).max_by(|&i, &j| points[i][0].total_cmp(&points[j][0])).unwrap_or(0);
            if points[lo] == points[hi] {
                vec![lo]
            } else {
                vec![lo, hi]
            }
        }
        2 => convex_hull_2d(points),
        n => {
            let mut out: Vec<usize> = sample_directions(n)
                .iter()
                .filter_map(|a| (0..points.len()).max_by(|&i, &j| dot(&points[i], a).total_cmp(&dot(&points[j], a))))
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        }
    }
}

/// Largest pairwise distance among the given points.
pub fn diameter(points: &[Vec<f64>], subset: &[usize]) -> f64 {
    let mut best: f64 = 0.0;
    for (k, &i) in subset.iter().enumerate() {
        for &j in &subset[k + 1..] {
            let d2: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.max(d2);
        }
    }
    best.sqrt()
}
