//! Property checks of sections, ellipsoids, balancedness and Legendre
//! transforms on sampled convex functions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use pmalab::geometry::{balancedness, centered_section, john_ellipsoid, section_at};
use pmalab::grid::{build_domain, sample, Domain, Shape};
use proptest::prelude::*;

/// Largest balancedness of a 2-D centered section about its own center of
/// mass, measured over the lopsided family below (worst seen: 1.32).
const CENTERED_SECTION_BALANCE_2D: f64 = 1.35;

fn disk(r: f64, h: f64) -> Arc<Domain> {
    Arc::new(build_domain(Shape::ball(vec![0.0, 0.0], r), h, 1).unwrap())
}

/// Nonnegative, vanishing at the origin, lopsided in `x₁`.
fn lopsided(a: f64, b: f64, c: f64) -> impl Fn(&[f64]) -> f64 {
    move |x: &[f64]| a * x[0].max(0.0).powi(2) + 0.2 * x[0].min(0.0).powi(2) + b * x[1] * x[1] + c * x[0].max(0.0).powi(4)
}

#[test]
fn centered_section_balancedness_regression() {
    let d = disk(2.0, 0.04);
    let o = d.nearest_node(&[0.0, 0.0]).unwrap();
    for (a, b, c) in [(1.0, 1.0, 0.0), (3.0, 0.5, 1.0), (0.5, 2.0, 4.0), (4.0, 4.0, 2.0), (1.0, 0.3, 8.0)] {
        let u = sample(&d, 0.0, lopsided(a, b, c)).unwrap();
        for h in [0.05, 0.1, 0.2] {
            let s = centered_section(&u, o, h).unwrap();
            let pts = s.points(&u);
            let cert = balancedness(&pts, &s.center).unwrap();
            assert!(cert.d >= 1.0 && cert.d <= CENTERED_SECTION_BALANCE_2D, "a={a} b={b} c={c} h={h}: d = {}", cert.d);
            // John's bound, loosely
            assert!(cert.d <= 4.0);
            assert!(cert.verify(&pts, 2.0 * d.spacing()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sections_nest(a in 0.3f64..3.0, b in 0.3f64..3.0, c in 0.0f64..4.0,
                     p1 in -0.3f64..0.3, p2 in -0.3f64..0.3, h1 in 0.01f64..0.1, extra in 0.0f64..0.2) {
        let d = disk(1.5, 0.05);
        let u = sample(&d, 0.0, lopsided(a, b, c)).unwrap();
        let o = d.nearest_node(&[0.1, -0.1]).unwrap();
        let small = section_at(&u, o, h1, &[p1, p2]).unwrap();
        let big = section_at(&u, o, h1 + extra, &[p1, p2]).unwrap();
        prop_assert!(small.nodes.iter().all(|i| big.nodes.binary_search(i).is_ok()));
    }

    #[test]
    fn balanced_section_height_bound(a in 0.5f64..3.0, b in 0.5f64..3.0, c in 0.0f64..4.0, h in 0.05f64..0.2) {
        let d = disk(2.0, 0.04);
        let w = lopsided(a, b, c);
        let u = sample(&d, 0.0, &w).unwrap();
        let o = d.nearest_node(&[0.0, 0.0]).unwrap();
        let s = centered_section(&u, o, h).unwrap();
        let cert = balancedness(&s.points(&u), &d.coords(o)).unwrap();
        // lattice error of the node hull: one spacing times the largest gradient on the section
        let grad = s
            .nodes
            .iter()
            .map(|&i| {
                let x = d.coords(i);
                let g1 = 2.0 * a * x[0].max(0.0) + 0.4 * x[0].min(0.0) + 4.0 * c * x[0].max(0.0).powi(3);
                g1.hypot(2.0 * b * x[1])
            })
            .fold(0.0, f64::max);
        let slack = grad * d.spacing();
        for &i in &s.nodes {
            let x = d.coords(i);
            let plane = h + s.slope[0] * x[0] + s.slope[1] * x[1];
            prop_assert!(u.value(i) <= cert.d * h + slack);
            prop_assert!(u.value(i) - plane > -cert.d * h - slack);
        }
    }

    #[test]
    fn john_ellipsoid_commutes_with_linear_maps(m11 in 0.5f64..2.0, m12 in -0.6f64..0.6, m21 in -0.6f64..0.6, m22 in 0.5f64..2.0,
                                                 c1 in -0.2f64..0.2, c2 in -0.2f64..0.2) {
        let l = DMatrix::from_row_slice(2, 2, &[m11, m12, m21, m22]);
        prop_assume!(l.determinant().abs() > 0.2);
        let h = 0.05;
        let pts: Vec<Vec<f64>> = (-20..=20)
            .flat_map(|i| (-20..=20).map(move |j| vec![i as f64 * h, j as f64 * h]))
            .filter(|x| x[0] * x[0] + 2.0 * x[1] * x[1] + 0.5 * x[0] * x[1] <= 0.8)
            .collect();
        let moved: Vec<Vec<f64>> = pts.iter().map(|x| (&l * DVector::from_column_slice(x)).iter().copied().collect()).collect();
        let c = [c1, c2];
        let lc: Vec<f64> = (&l * DVector::from_column_slice(&c)).iter().copied().collect();
        let direct = john_ellipsoid(&pts, &c).unwrap().transform(&l, &[0.0, 0.0]).unwrap();
        let image = john_ellipsoid(&moved, &lc).unwrap();
        // compare support functions in every direction
        for k in 0..72 {
            let t = k as f64 * std::f64::consts::PI / 36.0;
            let a = [t.cos(), t.sin()];
            prop_assert!((direct.support(&a) - image.support(&a)).abs() <= 3.0 * h * l.norm());
        }
    }
}
