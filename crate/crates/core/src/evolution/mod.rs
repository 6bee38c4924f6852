//! Explicit monotone time stepping of `u_t = F[u]`, the parabolic scaling
//! map, and discrete comparison checks.
//!
//! The step is forward Euler with `dt = κ h² / (max slope + ε)`, where the
//! slope is the operator's bound on `h² |∂F/∂u(x)|`. With `κ < 1` each update
//! is nondecreasing in every input value, so ordered states stay ordered.

mod comparison;
mod scaling;
mod state;

pub use comparison::{comparison_check, ComparisonReport, TOL_ORDER};
pub use scaling::{rescale, ScalingMap};
pub use state::{evolve, evolve_many, evolve_with, step, BoundaryData, EvolutionState, StepControl};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::exact::Barrier;
    use crate::grid::{build_domain, csv, sample, CoefficientField, Domain, Shape};
    use crate::operator::{MaOperator, OperatorConfig, Variant};

    fn disk(h: f64) -> Arc<Domain> {
        Arc::new(build_domain(Shape::unit_ball(2), h, 1).unwrap())
    }

    fn unit_op(d: &Arc<Domain>, p: f64) -> MaOperator {
        MaOperator::new(OperatorConfig::unit(p, 1).unwrap(), Arc::clone(d)).unwrap()
    }

    #[test]
    fn quadratic_plus_time_is_reproduced() {
        let d = disk(0.05);
        let u0 = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let bc = BoundaryData::function(|x: &[f64], t| 0.5 * (x[0] * x[0] + x[1] * x[1]) + t);
        let mut s = EvolutionState::new(u0, bc).unwrap();
        let op = unit_op(&d, 1.0);
        let snaps = evolve(&mut s, &op, &StepControl::default(), 0.1, &[]).unwrap();
        let u = snaps.last().unwrap();
        assert_eq!(u.time(), 0.1);
        let worst = d
            .interior()
            .iter()
            .map(|&i| {
                let x = d.coords(i);
                (u.value(i) - 0.5 * (x[0] * x[0] + x[1] * x[1]) - 0.1).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-3, "{worst}");
    }

    #[test]
    fn upper_barrier_stays_above() {
        let d = disk(0.05);
        let cap = 2.0;
        let w = Barrier::upper(2, 1.0, cap).unwrap();
        let b = CoefficientField::function(|x, _| 1.5 + 0.5 * x[0].signum(), 1.0, cap).unwrap();
        let op = MaOperator::new(OperatorConfig::new(1.0, 1, Variant::Plain, b).unwrap(), Arc::clone(&d)).unwrap();
        // w(·, 0) = 2|x|² − 5/4, so u0 = w(·, 0) − 0.05
        let u0 = sample(&d, 0.0, |x| 2.0 * (x[0] * x[0] + x[1] * x[1]) - 1.3).unwrap();
        let mut s = EvolutionState::new(u0, BoundaryData::Frozen).unwrap();
        let times = [0.001, 0.002, 0.004];
        let snaps = evolve(&mut s, &op, &StepControl::default(), 0.004, &times).unwrap();
        for u in &snaps {
            for i in d.active_nodes() {
                assert!(u.value(i) <= w.eval(&d.coords(i), u.time()) + 1e-10);
            }
        }
    }

    #[test]
    fn crease_moves_for_small_p() {
        // |x₂| inside |x| < 1/2, lifted above zero towards the boundary
        let d = disk(0.05);
        let u0 = sample(&d, 0.0, |x| x[1].abs().max(4.0 * (x[0] * x[0] + x[1] * x[1] - 0.25))).unwrap();
        let origin = d.nearest_node(&[0.0, 0.0]).unwrap();
        assert_eq!(u0.value(origin), 0.0);
        let mut s = EvolutionState::new(u0, BoundaryData::Frozen).unwrap();
        let op = unit_op(&d, 0.5);
        let snaps = evolve(&mut s, &op, &StepControl::default(), 0.02, &[0.01, 0.02]).unwrap();
        assert!(snaps[0].value(origin) > 0.0);
        assert!(snaps[1].value(origin) > snaps[0].value(origin));
    }

    #[test]
    fn zero_length_and_exact_snapshot_times() {
        let d = disk(0.1);
        let u0 = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let op = unit_op(&d, 1.0);
        let mut s = EvolutionState::new(u0, BoundaryData::Frozen).unwrap();
        let same = evolve(&mut s, &op, &StepControl::default(), 0.0, &[]).unwrap();
        assert_eq!(same.len(), 1);
        let snaps = evolve(&mut s, &op, &StepControl::default(), 0.02, &[0.01, 0.02]).unwrap();
        assert_eq!(snaps.len(), 2);
        assert_eq!(snaps[0].time(), 0.01);
        assert_eq!(snaps[1].time(), 0.02);
    }

    #[test]
    fn restart_and_worker_count_are_bit_exact() {
        let d = disk(0.05);
        let u0 = sample(&d, 0.0, |x| 0.5 * (x[0] * x[0] + 0.5 * x[1] * x[1]) + 0.3 * x[0].powi(4)).unwrap();
        let op = unit_op(&d, 1.0);
        let ctl = StepControl::default();

        let mut direct = EvolutionState::new(u0.clone(), BoundaryData::Frozen).unwrap();
        let full = evolve(&mut direct, &op, &ctl, 0.02, &[0.01, 0.02]).unwrap();

        let mut first = EvolutionState::new(u0.clone(), BoundaryData::Frozen).unwrap();
        let half = evolve(&mut first, &op, &ctl, 0.01, &[0.01]).unwrap();
        let mut buf = Vec::new();
        csv::write_grid(&half[0], &mut buf).unwrap();
        let reloaded = csv::read_grid(&buf[..]).unwrap();
        let op2 = unit_op(reloaded.domain(), 1.0);
        let mut second = EvolutionState::new(reloaded, BoundaryData::Frozen).unwrap();
        let rest = evolve(&mut second, &op2, &ctl, 0.02, &[]).unwrap();
        for i in d.active_nodes() {
            assert_eq!(full[1].value(i).to_bits(), rest[0].value(i).to_bits());
        }

        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let threaded = pool.install(|| {
            let mut s = EvolutionState::new(u0.clone(), BoundaryData::Frozen).unwrap();
            evolve(&mut s, &op, &ctl, 0.02, &[0.01, 0.02]).unwrap()
        });
        for i in d.active_nodes() {
            assert_eq!(full[1].value(i).to_bits(), threaded[1].value(i).to_bits());
        }
    }

    #[test]
    fn stiff_state_is_reported() {
        let d = disk(0.1);
        let u0 = sample(&d, 0.0, |x| 1e9 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let op = unit_op(&d, 2.0);
        let mut s = EvolutionState::new(u0, BoundaryData::Frozen).unwrap();
        assert!(matches!(step(&mut s, &op, &StepControl::default(), 1.0), Err(crate::Error::StiffState { .. })));
    }

    #[test]
    fn comparison_of_shifted_pair() {
        let d = disk(0.1);
        let u0 = sample(&d, 0.0, |x| x[0] * x[0] + 0.2 * x[1] * x[1]).unwrap();
        let v0 = sample(&d, 0.0, |x| x[0] * x[0] + 0.2 * x[1] * x[1] + 1.0).unwrap();
        let op = unit_op(&d, 1.0);
        let mut states = vec![
            EvolutionState::new(u0, BoundaryData::Frozen).unwrap(),
            EvolutionState::new(v0, BoundaryData::Frozen).unwrap(),
        ];
        let out = evolve_many(&mut states, &op, &StepControl::default(), 0.05, &[0.01, 0.05]).unwrap();
        let r = comparison_check(&out[0], &out[1]).unwrap();
        assert!(r.passed);
        assert!(comparison_check(&out[1], &out[0]).is_err());
    }
}
