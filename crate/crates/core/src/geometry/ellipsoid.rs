use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hull::{convex_hull_2d, dot, gaussian, sample_directions, support};
use crate::error::{Error, Result};
use crate::grid::csv::fmt_real;

/// Volume of the unit ball in `ℝⁿ`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// `{x : (x − c)ᵀ M⁻¹ (x − c) <= 1}` with `M` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: Vec<f64>,
    shape: DMatrix<f64>,
    volume: f64,
}

impl Ellipsoid {
    pub fn new(center: Vec<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::InvalidArgument("ellipsoid shape does not match center".into()));
        }
        let sym = (&shape + shape.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::NotPositiveSemidefinite);
        }
        let det: f64 = eig.eigenvalues.iter().product();
        Ok(Self { center, shape: sym, volume: unit_ball_volume(n) * det.sqrt() })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        Self::new(center, DMatrix::from_diagonal_element(n, n, radius * radius))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// `M`.
    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `max_{x ∈ E} a·x`.
    pub fn support(&self, a: &[f64]) -> f64 {
        let v = DVector::from_column_slice(a);
        dot(a, &self.center) + (v.transpose() * &self.shape * &v)[(0, 0)].max(0.0).sqrt()
    }

    /// `(x − c)ᵀ M⁻¹ (x − c)`.
    pub fn gauge2(&self, x: &[f64]) -> f64 {
        let y = DVector::from_iterator(self.dim(), x.iter().zip(&self.center).map(|(a, b)| a - b));
        let inv = self.shape.clone().cholesky().expect("shape is positive definite").inverse();
        (y.transpose() * inv * &y)[(0, 0)]
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        self.gauge2(x) <= (1.0 + slack).powi(2)
    }

    /// `M^(−1/2)`, which maps the ellipsoid minus its center onto the unit ball.
    pub fn normalizing_map(&self) -> DMatrix<f64> {
        let eig = SymmetricEigen::new(self.shape.clone());
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    }

    /// Image under `x ↦ L x + b`.
    pub fn transform(&self, l: &DMatrix<f64>, b: &[f64]) -> Result<Self> {
        let c = l * DVector::from_column_slice(&self.center);
        let center = c.iter().zip(b).map(|(x, y)| x + y).collect();
        Self::new(center, l * &self.shape * l.transpose())
    }

    /// Header `kind,index,value`: center entries then `M` row-major.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "kind,index,value")?;
        for (i, c) in self.center.iter().enumerate() {
            writeln!(out, "center,{i},{}", fmt_real(*c))?;
        }
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                writeln!(out, "matrix,{},{}", i * n + j, fmt_real(self.shape[(i, j)]))?;
            }
        }
        writeln!(out, "volume,0,{}", fmt_real(self.volume))?;
        Ok(())
    }
}

/// Support constraints `aᵀMa <= s_a²`, `s_a = h_S(a) − a·c`, of ellipsoids
/// centered at `c` inside the hull of `points`.
struct HullConstraints {
    dirs: Vec<Vec<f64>>,
    gaps: Vec<f64>,
}

impl HullConstraints {
    fn new(points: &[Vec<f64>], center: &[f64]) -> Self {
        let n = center.len();
        let mut dirs = sample_directions(n);
        if n == 2 {
            // exact facet normals make the planar constraints sharp
            let hull = convex_hull_2d(points);
            for k in 0..hull.len() {
                let (a, b) = (&points[hull[k]], &points[hull[(k + 1) % hull.len()]]);
                let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                let len = ex.hypot(ey);
                if len > 0.0 {
                    dirs.push(vec![ey / len, -ex / len]);
                }
            }
        }
        let gaps = dirs.iter().map(|a| support(points, a) - dot(a, center)).collect();
        Self { dirs, gaps }
    }

    /// Largest `τ` with `τ M` feasible.
    fn max_scale(&self, m: &DMatrix<f64>) -> f64 {
        self.dirs
            .iter()
            .zip(&self.gaps)
            .map(|(a, s)| {
                let v = DVector::from_column_slice(a);
                s * s / (v.transpose() * m * &v)[(0, 0)]
            })
            .fold(f64::INFINITY, f64::min)
    }
}

const BARRIER_GROWTH: f64 = 10.0;
const BARRIER_GAP: f64 = 1e-8;
const NEWTON_MAX: usize = 100;

/// Maximal-volume ellipsoid centered at `center` inside the hull of `points`.
///
/// Maximizes `log det M` subject to the support constraints over
/// [`sample_directions`] (plus exact facet normals in 2-D) with a log-barrier
/// Newton method on the entries of `M`.
pub fn john_ellipsoid(points: &[Vec<f64>], center: &[f64]) -> Result<Ellipsoid> {
    let n = center.len();
    if points.is_empty() || n == 0 {
        return Err(Error::InvalidArgument("john_ellipsoid needs a nonempty point set".into()));
    }
    if points.iter().any(|x| x.len() != n) {
        return Err(Error::InvalidArgument("point dimension mismatch".into()));
    }
    let mean: Vec<f64> = (0..n).map(|k| points.iter().map(|x| x[k]).sum::<f64>() / points.len() as f64).collect();
    let cov = DMatrix::from_fn(n, n, |a, b| {
        points.iter().map(|x| (x[a] - mean[a]) * (x[b] - mean[b])).sum::<f64>() / points.len() as f64
    });
    let eig = SymmetricEigen::new(cov);
    let top = eig.eigenvalues.max();
    if !(eig.eigenvalues.min() > 1e-12 * top.max(f64::MIN_POSITIVE)) || points.len() <= n {
        return Err(Error::FlatSet);
    }
    let cons = HullConstraints::new(points, center);
    let min_gap = cons.gaps.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_gap > 1e-12 * top.sqrt()) {
        return Err(Error::BasePointNotInterior);
    }

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let kdim = pairs.len();
    let coeffs: Vec<Vec<f64>> = cons
        .dirs
        .iter()
        .map(|a| pairs.iter().map(|&(i, j)| if i == j { a[i] * a[i] } else { 2.0 * a[i] * a[j] }).collect())
        .collect();
    let assemble = |x: &[f64]| {
        let mut m = DMatrix::zeros(n, n);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            m[(i, j)] = x[k];
            m[(j, i)] = x[k];
        }
        m
    };
    let basis: Vec<DMatrix<f64>> = (0..kdim)
        .map(|k| {
            let mut e = vec![0.0; kdim];
            e[k] = 1.0;
            assemble(&e)
        })
        .collect();
    // φ_t(x) = −t log det M − Σ log(s_a² − c_a·x); None if infeasible
    let objective = |x: &[f64], t: f64| -> Option<f64> {
        let chol = assemble(x).cholesky()?;
        let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let mut bar = 0.0;
        for (c, s) in coeffs.iter().zip(&cons.gaps) {
            let r = s * s - dot(c, x);
            if !(r > 0.0) {
                return None;
            }
            bar -= r.ln();
        }
        Some(-t * logdet + bar)
    };

    let r0 = 0.9 * min_gap;
    let mut x: Vec<f64> = pairs.iter().map(|&(i, j)| if i == j { r0 * r0 } else { 0.0 }).collect();
    let m_cons = cons.dirs.len() as f64;
    let mut t = 1.0;
    loop {
        for _ in 0..NEWTON_MAX {
            let m = assemble(&x);
            let Some(minv) = m.clone().cholesky().map(|c| c.inverse()) else { break };
            let pk: Vec<DMatrix<f64>> = basis.iter().map(|e| &minv * e).collect();
            let mut g = DVector::zeros(kdim);
            let mut h = DMatrix::zeros(kdim, kdim);
            for k in 0..kdim {
                g[k] = -t * pk[k].trace();
                for l in k..kdim {
                    let v = t * (&pk[k] * &pk[l]).trace();
                    h[(k, l)] = v;
                    h[(l, k)] = v;
                }
            }
            for (c, s) in coeffs.iter().zip(&cons.gaps) {
                let r = s * s - dot(c, &x);
                for k in 0..kdim {
                    g[k] += c[k] / r;
                    for l in 0..kdim {
                        h[(k, l)] += c[k] * c[l] / (r * r);
                    }
                }
            }
            let Some(step) = h.clone().cholesky().map(|ch| ch.solve(&(-&g))) else { break };
            let decrement = -g.dot(&step);
            if decrement / 2.0 < 1e-12 {
                break;
            }
            let f0 = objective(&x, t).unwrap_or(f64::INFINITY);
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-12 {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + alpha * b).collect();
                if let Some(f) = objective(&trial, t) {
                    if f <= f0 - 0.25 * alpha * decrement {
                        x = trial;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if m_cons / t < BARRIER_GAP {
            break;
        }
        t *= BARRIER_GROWTH;
    }
    Ellipsoid::new(center.to_vec(), assemble(&x))
}

/// Largest volume ratio, relative to `e`, among `samples` random perturbations
/// of `e` scaled to fit the same hull constraints.
pub fn perturbation_check(points: &[Vec<f64>], e: &Ellipsoid, samples: usize, seed: u64) -> f64 {
    let n = e.dim();
    let cons = HullConstraints::new(points, e.center());
    let eig = SymmetricEigen::new(e.shape().clone());
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let eps: f64 = rng.random::<f64>() * 0.2;
        let mut s = DMatrix::from_fn(n, n, |_, _| gaussian(&mut rng));
        s = (&s + s.transpose()) * (0.5 * eps);
        let mut cand = DMatrix::identity(n, n) + s;
        if SymmetricEigen::new(cand.clone()).eigenvalues.min() <= 0.0 {
            continue;
        }
        cand = &root * cand * &root;
        let tau = cons.max_scale(&cand);
        let vol = unit_ball_volume(n) * (tau.powi(n as i32) * cand.determinant()).sqrt();
        best = best.max(vol / e.volume());
    }
    best
}

/// Witness that `B₁ ⊂ A (S − x₀) ⊂ B_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancednessCertificate {
    pub base: Vec<f64>,
    pub d: f64,
    /// `A`, the normalizing map of the John ellipsoid centered at the base.
    pub map: DMatrix<f64>,
    pub ellipsoid: Ellipsoid,
}

impl BalancednessCertificate {
    /// Checks both inclusions on the point hull with slack `tol` measured in
    /// the original coordinates.
    pub fn verify(&self, points: &[Vec<f64>], tol: f64) -> bool {
        let n = self.base.len();
        let slack = tol * self.map.norm();
        let outer = points.iter().all(|x| image_norm(&self.map, x, &self.base) <= self.d + slack);
        let at = self.map.transpose();
        let inner = sample_directions(n).iter().all(|a| {
            let w = &at * DVector::from_column_slice(a);
            support(points, w.as_slice()) - dot(w.as_slice(), &self.base) >= 1.0 - slack
        });
        outer && inner
    }
}

fn image_norm(a: &DMatrix<f64>, x: &[f64], base: &[f64]) -> f64 {
    let y = DVector::from_iterator(base.len(), x.iter().zip(base).map(|(p, q)| p - q));
    (a * y).norm()
}

/// Balancedness of the hull of `points` about `x₀`, normalized by the John
/// ellipsoid centered at `x₀`; `d >= 1` always.
pub fn balancedness(points: &[Vec<f64>], x0: &[f64]) -> Result<BalancednessCertificate> {
    let ellipsoid = john_ellipsoid(points, x0)?;
    let map = ellipsoid.normalizing_map();
    let d = points.iter().map(|x| image_norm(&map, x, x0)).fold(1.0, f64::max);
    Ok(BalancednessCertificate { base: x0.to_vec(), d, map, ellipsoid })
}
