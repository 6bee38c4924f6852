use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction};

/// `u*(ξ) = max_j (ξ x_j − u_j)` on a 1-D sample, by direct maximization.
pub fn legendre_1d(xs: &[f64], us: &[f64], xis: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != us.len() || xs.is_empty() {
        return Err(Error::InvalidArgument("legendre_1d needs matching nonempty samples".into()));
    }
    Ok(xis
        .iter()
        .map(|&xi| xs.iter().zip(us).map(|(x, u)| xi * x - u).fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

/// Discrete Legendre transform `u*(ξ) = max_x (ξ·x − u(x))` over the active
/// nodes of `u`, evaluated on the active nodes of `dual`.
///
/// The maximum over the product lattice factors into one 1-D maximization per
/// axis; inactive primal nodes enter as `−∞`.
pub fn legendre(u: &GridFunction, dual: &Arc<Domain>) -> Result<GridFunction> {
    let d = u.domain();
    let n = d.dim();
    if dual.dim() != n {
        return Err(Error::InvalidArgument("dual grid dimension differs".into()));
    }
    let mut shape: Vec<usize> = d.counts().to_vec();
    // axis 0 fastest
    let mut data: Vec<f64> = vec![f64::NEG_INFINITY; shape.iter().product()];
    for i in d.active_nodes() {
        data[flat(&d.multi_index(i), &shape)] = -u.value(i);
    }
    for k in 0..n {
        let xs: Vec<f64> = (0..shape[k]).map(|j| d.axis_coord(k, j)).collect();
        let xis: Vec<f64> = (0..dual.counts()[k]).map(|j| dual.axis_coord(k, j)).collect();
        let mut next_shape = shape.clone();
        next_shape[k] = xis.len();
        let inner: usize = shape[..k].iter().product();
        let outer: usize = shape[k + 1..].iter().product();
        let (old_len, new_len) = (shape[k], next_shape[k]);
        let mut next = vec![f64::NEG_INFINITY; next_shape.iter().product()];
        for o in 0..outer {
            for a in 0..inner {
                for (jn, &xi) in xis.iter().enumerate() {
                    let mut best = f64::NEG_INFINITY;
                    for (jo, &x) in xs.iter().enumerate() {
                        let v = data[a + inner * (jo + old_len * o)];
                        if v > f64::NEG_INFINITY {
                            best = best.max(xi * x + v);
                        }
                    }
                    next[a + inner * (jn + new_len * o)] = best;
                }
            }
        }
        data = next;
        shape = next_shape;
    }
    let mut values = vec![f64::NAN; dual.len()];
    for i in dual.active_nodes() {
        values[i] = data[flat(&dual.multi_index(i), &shape)];
    }
    GridFunction::from_values(Arc::clone(dual), values, u.time())
}

fn flat(multi: &[usize], shape: &[usize]) -> usize {
    let mut idx = 0;
    let mut stride = 1;
    for (m, s) in multi.iter().zip(shape) {
        idx += m * stride;
        stride *= s;
    }
    idx
}

/// Per-axis range of one-sided difference quotients over interior nodes, a
/// dual box that contains every discrete subgradient.
pub fn slope_box(u: &GridFunction) -> (Vec<f64>, Vec<f64>) {
    let d = u.domain();
    let n = d.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for &i in d.interior() {
        for k in 0..n {
            let mut e = vec![0; n];
            e[k] = 1;
            for s in [1, -1] {
                e[k] = s;
                if let Some(j) = d.neighbor(i, &e).filter(|&j| d.is_active(j)) {
                    let q = (u.value(j) - u.value(i)) / (s as f64 * d.spacing());
                    lo[k] = lo[k].min(q);
                    hi[k] = hi[k].max(q);
                }
            }
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::grid::{build_domain, discrete_convexity_check, sample, Shape};

    fn brute(u: &GridFunction, xi: &[f64]) -> f64 {
        let d = u.domain();
        d.active_nodes()
            .map(|i| {
                let x = d.coords(i);
                x.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() - u.value(i)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn separable_passes_match_brute_force() {
        let d = Arc::new(build_domain(Shape::unit_ball(2), 0.1, 1).unwrap());
        let u = sample(&d, 0.0, |x| (x[0] - 0.2).powi(2) + 0.5 * x[1].powi(4) + 0.3 * x[0] * x[1]).unwrap();
        let dual = Arc::new(build_domain(Shape::cube(2, -1.5, 1.5), 0.25, 1).unwrap());
        let ustar = legendre(&u, &dual).unwrap();
        for i in dual.active_nodes() {
            assert!((ustar.value(i) - brute(&u, &dual.coords(i))).abs() < 1e-12);
        }
        assert!(discrete_convexity_check(&ustar).passed);
    }

    #[test]
    fn paraboloid_is_self_dual() {
        let h = 0.02;
        let d = Arc::new(build_domain(Shape::cube(2, -1.0, 1.0), h, 1).unwrap());
        let u = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let dual = Arc::new(build_domain(Shape::cube(2, -0.8, 0.8), 0.1, 1).unwrap());
        let ustar = legendre(&u, &dual).unwrap();
        for &i in dual.interior() {
            let xi = dual.coords(i);
            assert!((ustar.value(i) - 0.5 * (xi[0] * xi[0] + xi[1] * xi[1])).abs() <= h * h);
        }
    }

    #[test]
    fn absolute_value_conjugate_vanishes() {
        let xs: Vec<f64> = (-50..=50).map(|i| i as f64 / 50.0).collect();
        let us: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        let xis: Vec<f64> = (-10..=10).map(|i| i as f64 / 10.0).collect();
        let s = legendre_1d(&xs, &us, &xis).unwrap();
        assert!(s.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn double_transform_recovers_convex_samples() {
        let n = 200;
        let h = 2.0 / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| -1.0 + i as f64 * h).collect();
        let us: Vec<f64> = xs.iter().map(|x| (x + 0.3).abs() + 0.7 * x * x).collect();
        let xis: Vec<f64> = (0..n).map(|i| -3.0 + 6.0 * i as f64 / (n - 1) as f64).collect();
        let s = legendre_1d(&xs, &us, &xis).unwrap();
        let back = legendre_1d(&xis, &s, &xs).unwrap();
        let err = back.iter().zip(&us).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 2.0 * h, "{err}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn transform_reverses_order(a in 0.2f64..2.0, b in 0.2f64..2.0, shift in 0.0f64..1.0, tilt in -0.5f64..0.5) {
            let d = Arc::new(build_domain(Shape::unit_ball(2), 0.1, 1).unwrap());
            let u = sample(&d, 0.0, |x| a * x[0] * x[0] + b * x[1] * x[1] + tilt * x[0]).unwrap();
            let v = sample(&d, 0.0, |x| a * x[0] * x[0] + b * x[1] * x[1] + tilt * x[0] + shift + 0.1 * x[1].powi(2)).unwrap();
            let dual = Arc::new(build_domain(Shape::cube(2, -2.0, 2.0), 0.2, 1).unwrap());
            let us = legendre(&u, &dual).unwrap();
            let vs = legendre(&v, &dual).unwrap();
            for i in dual.active_nodes() {
                prop_assert!(us.value(i) >= vs.value(i) - 1e-12);
            }
        }
    }
}
