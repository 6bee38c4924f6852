use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Second-order centered Hessian at `node` (axis second differences and the
/// four-point cross difference). Consistent but not monotone; used for
/// residual checks, not for time stepping.
pub fn centered_hessian(u: &GridFunction, node: usize) -> Result<DMatrix<f64>> {
    let d = u.domain();
    let n = d.dim();
    let h2 = d.spacing() * d.spacing();
    let at = |dir: &[i32]| -> Result<f64> {
        d.neighbor(node, dir)
            .filter(|&j| d.is_active(j))
            .map(|j| u.value(j))
            .ok_or_else(|| Error::OutOfRange(format!("centered stencil leaves the grid at {:?}", d.coords(node))))
    };
    let c = u.value(node);
    let mut hess = DMatrix::zeros(n, n);
    let mut e = vec![0i32; n];
    for i in 0..n {
        e[i] = 1;
        let plus = at(&e)?;
        e[i] = -1;
        let minus = at(&e)?;
        e[i] = 0;
        hess[(i, i)] = (plus + minus - 2.0 * c) / h2;
        for j in i + 1..n {
            let mut cross = 0.0;
            for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                e[i] = si;
                e[j] = sj;
                cross += (si * sj) as f64 * at(&e)?;
            }
            e[i] = 0;
            e[j] = 0;
            hess[(i, j)] = cross / (4.0 * h2);
            hess[(j, i)] = hess[(i, j)];
        }
    }
    Ok(hess)
}

/// `det` of [`centered_hessian`].
pub fn centered_det(u: &GridFunction, node: usize) -> Result<f64> {
    Ok(centered_hessian(u, node)?.determinant())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::grid::{build_domain, sample, Shape};

    #[test]
    fn quadratics_are_exact() {
        let d = Arc::new(build_domain(Shape::unit_ball(3), 0.1, 1).unwrap());
        let u = sample(&d, 0.0, |x| x[0] * x[0] + 0.5 * x[0] * x[1] + 2.0 * x[1] * x[1] - x[1] * x[2] + 0.7 * x[2] * x[2]).unwrap();
        let o = d.nearest_node(&[0.1, -0.2, 0.0]).unwrap();
        let hess = centered_hessian(&u, o).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 4.0, -1.0, 0.0, -1.0, 1.4]);
        assert!((hess - &expect).abs().max() < 1e-9);
        assert!((centered_det(&u, o).unwrap() - expect.determinant()).abs() < 1e-8);
    }

    #[test]
    fn band_node_is_out_of_range() {
        let d = Arc::new(build_domain(Shape::unit_ball(2), 0.1, 1).unwrap());
        let u = sample(&d, 0.0, |x| x[0] * x[0]).unwrap();
        assert!(matches!(centered_hessian(&u, d.band()[0]), Err(Error::OutOfRange(_))));
    }
}
