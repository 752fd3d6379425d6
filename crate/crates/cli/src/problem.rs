//! Turns a validated [`RunConfig`] into solver objects.

use anyhow::{anyhow, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sdd_core::delay_term::{BirthFunction, DelayTerm};
use sdd_core::measure::{
    AbsContPart, Atom, DefaultFamily, DiscretePart, GeneratingMeasure, JumpLaw, LagLaw,
    SingularPart,
};
use sdd_core::solver::{Solver, SolverConfig};
use sdd_core::spatial::{DomainConfig, Kernel, SpatialOperator, SpectralField};
use sdd_core::verify::random_segment;
use sdd_core::HistorySegment;

use crate::config::{InitialKind, KernelKind, RunConfig};

pub struct Problem {
    pub solver: Solver,
    pub phi0: HistorySegment,
}

impl Problem {
    pub fn term(&self) -> &DelayTerm {
        self.solver.term()
    }
}

pub fn measure(cfg: &RunConfig) -> Result<GeneratingMeasure> {
    let m = &cfg.measure;
    let r = cfg.r();
    let family = DefaultFamily {
        r,
        eta_ign: m.eta_ign,
        n_atoms: m.n_atoms,
        c_decay: m.c_decay,
        ac_mass: m.ac_mass,
        beta: m.beta,
        gamma0: m.gamma0,
        gamma1: m.gamma1,
        cantor_depth: m.cantor_depth,
        ac_intervals: m.ac_intervals,
    };
    let gm = if m.state_dependent_atoms {
        family.build()?
    } else {
        // same lag positions at J = 0, fixed jumps c^k
        let lags = DiscretePart::logistic_family(r, m.eta_ign, m.n_atoms, m.c_decay)?.evaluate(0.0, r)?.0;
        let atoms = lags
            .into_iter()
            .enumerate()
            .map(|(k, eta)| Atom {
                lag: LagLaw::Fixed { eta },
                jump: JumpLaw::Fixed {
                    h: m.c_decay.powi(k as i32 + 1),
                },
            })
            .collect();
        GeneratingMeasure::new(
            r,
            DiscretePart::new(r, m.eta_ign, atoms)?,
            AbsContPart::uniform(r, m.ac_mass, m.beta, m.ac_intervals)?,
            SingularPart::new(r, m.gamma0, m.gamma1, m.cantor_depth)?,
        )?
    };
    Ok(match m.m_vg {
        Some(v) => gm.with_variation_bound(v)?,
        None => gm,
    })
}

pub fn operator(cfg: &RunConfig) -> Result<SpatialOperator> {
    let d = &cfg.domain;
    Ok(SpatialOperator::new(
        DomainConfig::new(d.length, d.n_modes, d.n_grid)?,
        cfg.damping(),
    )?)
}

pub fn kernel(cfg: &RunConfig, op: &SpatialOperator) -> Result<Kernel> {
    let k = &cfg.kernel;
    Ok(match k.preset {
        KernelKind::Constant => Kernel::constant(op.domain(), k.amplitude)?,
        KernelKind::GaussianBump => Kernel::gaussian_bump(
            op.domain(),
            k.amplitude,
            k.width.ok_or_else(|| anyhow!("kernel.width missing"))?,
        )?,
    })
}

pub fn birth(cfg: &RunConfig) -> Result<BirthFunction> {
    let preset = cfg
        .birth_preset()
        .ok_or_else(|| anyhow!("birth parameters incomplete"))?;
    Ok(BirthFunction::new(preset, cfg.birth.mode)?)
}

/// `n_steps = r / dt + 1`.
pub fn history_nodes(r: f64, dt: f64) -> usize {
    (r / dt).round() as usize + 1
}

pub fn initial_segment(cfg: &RunConfig, n_steps: usize) -> Result<HistorySegment> {
    let r = cfg.r();
    let n = cfg.domain.n_modes;
    let ini = &cfg.initial;
    let amp = ini.amplitude;
    Ok(match ini.preset {
        InitialKind::Smooth => HistorySegment::from_fn(r, n_steps, |t| {
            SpectralField::from_coeffs(
                (1..=n)
                    .map(|j| {
                        let jf = j as f64;
                        amp * (1.0 + 0.5 * (2.0 * t + jf).sin()) / (jf * jf)
                    })
                    .collect(),
            )
        })?,
        InitialKind::Mode => {
            HistorySegment::constant(r, n_steps, &SpectralField::mode(n, ini.mode).scaled(amp))?
        }
        InitialKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            random_segment(&mut rng, r, n_steps, n, amp)?
        }
    })
}

/// The configured problem with step `dt`; the history grid follows `dt`.
pub fn build_with_dt(cfg: &RunConfig, dt: f64, t_end: f64) -> Result<Problem> {
    let op = operator(cfg)?;
    let k = kernel(cfg, &op)?;
    let n_steps = history_nodes(cfg.r(), dt);
    let term = DelayTerm::new(op, k, birth(cfg)?, measure(cfg)?, n_steps)?;
    let s = &cfg.solver;
    let scfg = SolverConfig {
        dt,
        t_end,
        fp_tol: s.fp_tol,
        fp_max_iter: s.fp_max_iter,
        damping_mode: s.damping_mode,
        fp_start: s.fp_start,
        deltas: s.deltas.clone(),
    };
    Ok(Problem {
        solver: Solver::new(term, scfg)?,
        phi0: initial_segment(cfg, n_steps)?,
    })
}

pub fn build(cfg: &RunConfig) -> Result<Problem> {
    build_with_dt(cfg, cfg.solver.dt, cfg.solver.t_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::tests::NICHOLSON;

    #[test]
    fn history_grid_follows_the_step() {
        assert_eq!(history_nodes(1.0, 0.05), 21);
        assert_eq!(history_nodes(1.0, 0.01), 101);
        let cfg = RunConfig::from_toml(NICHOLSON).unwrap();
        let p = build_with_dt(&cfg, 0.02, 1.0).unwrap();
        assert_eq!(p.phi0.n_steps(), 51);
        assert_eq!(p.term().n_steps(), 51);
    }

    #[test]
    fn fixed_atoms_ignore_the_state() {
        let text = NICHOLSON.replace("beta = 0.5", "beta = 0.5\nstate_dependent_atoms = false");
        let cfg = RunConfig::from_toml(&text).unwrap();
        let gm = measure(&cfg).unwrap();
        let small = HistorySegment::constant(1.0, 21, &SpectralField::zeros(16)).unwrap();
        let big = HistorySegment::constant(1.0, 21, &SpectralField::mode(16, 1).scaled(5.0)).unwrap();
        let (a, b) = (gm.state(&small).unwrap(), gm.state(&big).unwrap());
        assert_eq!(a.lags, b.lags);
        assert_eq!(a.jumps, b.jumps);
        assert_eq!(a.jumps[0], 0.5);
    }

    #[test]
    fn initial_presets() {
        let cfg = RunConfig::from_toml(NICHOLSON).unwrap();
        let s = initial_segment(&cfg, 21).unwrap();
        assert!(s.segment_norm() > 0.0);
        let text = format!("{NICHOLSON}\n[initial]\npreset = \"mode\"\nmode = 2\namplitude = 3.0\n");
        let cfg = RunConfig::from_toml(&text).unwrap();
        let s = initial_segment(&cfg, 21).unwrap();
        assert!(s.frames().iter().all(|f| f.coeffs()[1] == 3.0 && f.norm() == 3.0));
    }
}
