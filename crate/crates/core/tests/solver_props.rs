use std::f64::consts::PI;

use sdd_core::measure::DefaultFamily;
use sdd_core::solver::DampingMode;
use sdd_core::{
    BirthFunction, DelayTerm, DomainConfig, HistorySegment, Kernel, Solver, SolverConfig,
    SpatialOperator, SpectralField,
};

fn solver(dt: f64, t_end: f64, mode: DampingMode) -> Solver {
    let op = SpatialOperator::new(DomainConfig::new(PI, 8, 16).unwrap(), 0.5).unwrap();
    let k = Kernel::gaussian_bump(op.domain(), 1.0, 0.5).unwrap();
    let gm = DefaultFamily::standard(1.0, 0.2).build().unwrap();
    let n = (1.0 / dt).round() as usize + 1;
    let term = DelayTerm::new(op, k, BirthFunction::nicholson(2.0).unwrap(), gm, n).unwrap();
    let mut cfg = SolverConfig::new(dt, t_end);
    cfg.damping_mode = mode;
    Solver::new(term, cfg).unwrap()
}

fn initial(n_steps: usize) -> HistorySegment {
    HistorySegment::from_fn(1.0, n_steps, |t| {
        SpectralField::from_coeffs((1..=8).map(|j| (1.0 + 0.5 * (3.0 * t + j as f64).sin()) / j as f64).collect())
    })
    .unwrap()
}

#[test]
fn semigroup_property() {
    let s = solver(0.05, 1.5, DampingMode::Absorbed);
    let phi0 = initial(21);
    let long = s.integrate_observed(&phi0, 1.5, |_, _, _| Ok(())).unwrap();
    let first = s.integrate_observed(&phi0, 1.0, |_, _, _| Ok(())).unwrap();
    let second = s
        .integrate_observed(&first.final_segment(), 0.5, |_, _, _| Ok(()))
        .unwrap();
    let a = long.final_segment();
    let b = second.final_segment();
    assert!(a.distance(&b).unwrap() < 1e-10);
}

#[test]
fn damping_modes_agree_to_first_order() {
    let gap = |dt: f64| {
        let n = (1.0 / dt).round() as usize + 1;
        let phi0 = initial(n);
        let a = solver(dt, 1.0, DampingMode::Absorbed).integrate(&phi0).unwrap();
        let b = solver(dt, 1.0, DampingMode::Integrand).integrate(&phi0).unwrap();
        a.frame_at(a.len() - 1).distance(b.frame_at(b.len() - 1))
    };
    let (g1, g2) = (gap(0.05), gap(0.025));
    assert!(g1 > 0.0);
    let ratio = g1 / g2;
    assert!((1.6..2.6).contains(&ratio), "gaps {g1} {g2}, ratio {ratio}");
}
