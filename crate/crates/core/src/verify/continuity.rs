//! Probes on the delay term for a fixed history: Lipschitz continuity of
//! `F_c`, the `I₁ + I₂` and `K₁ⁿ + K₂ⁿ + K₃ⁿ` splits along `φⁿ → φ`,
//! the non-convergence of `g_d(θ₀, φⁿ)` and the ignoring condition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::delay_term::DelayTerm;
use crate::error::Result;
use crate::history::HistorySegment;
use crate::measure::{
    ignoring_functional, AbsContPart, Atom, DiscretePart, GeneratingMeasure, JumpLaw, LagLaw,
    SingularPart,
};
use crate::spatial::SpectralField;

use super::{random_segment, ProbeReport};

/// `φⁿ = φ + 2^{−n} ψ` for `n = 1..=n_probes`.
pub fn perturbation_sequence(
    phi: &HistorySegment,
    dir: &HistorySegment,
    n_probes: usize,
) -> Result<Vec<HistorySegment>> {
    (1..=n_probes)
        .map(|n| phi.add_scaled(0.5f64.powi(n as i32), dir))
        .collect()
}

fn record_constants(report: &mut ProbeReport, term: &DelayTerm) {
    let c = term.constants();
    report.constant("M_f", c.m_f);
    report.constant("omega", c.omega);
    report.constant("L_b", c.l_b);
    report.constant("C1", c.c1);
    report.constant("C2", c.c2);
    report.constant("M_Vg", c.m_vg);
    report.constant("M_Vgc", c.m_vg_c);
    report.constant("L_Vgc", c.l_vg_c);
    if let Some(m_b) = c.m_b {
        report.constant("M_b", m_b);
    }
    if let Some(l) = c.l_fc {
        report.constant("L_Fc", l);
    }
}

/// `‖F_c(φ) − F_c(ψ)‖ ≤ L_{F_c} ‖φ − ψ‖_C` over random pairs, with `ψ − φ`
/// of size `10^{U(−4, 0)}`.
pub fn probe_lipschitz(term: &DelayTerm, n_pairs: usize, seed: u64, slack: f64) -> Result<ProbeReport> {
    let mut report = ProbeReport::new("lipschitz", slack);
    record_constants(&mut report, term);
    let l_fc = term.lipschitz_constant_fc()?;
    let r = term.measure().r();
    let (n_steps, n_modes) = (term.n_steps(), term.op().n_modes());
    let results = (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let scale = rand::Rng::gen_range(&mut rng, 0.1..3.0);
            let phi = random_segment(&mut rng, r, n_steps, n_modes, scale)?;
            let eps = 10f64.powf(rand::Rng::gen_range(&mut rng, -4.0..0.0));
            let dir = random_segment(&mut rng, r, n_steps, n_modes, 1.0)?;
            let psi = phi.add_scaled(eps, &dir)?;
            let diff = term.eval_fc(&phi)?.distance(&term.eval_fc(&psi)?);
            Ok((phi.distance(&psi)?, diff))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for (i, (dist, diff)) in results.into_iter().enumerate() {
        report.check(i as f64, "Fc_diff", l_fc * dist, diff);
        if dist > 0.0 {
            worst = worst.max(diff / (l_fc * dist));
        }
    }
    report.constant("max_ratio_to_bound", worst);
    Ok(report)
}

/// `F_c(φⁿ) − F_c(φ) = I₁ + I₂` along `φⁿ = φ + 2^{−n}ψ`.
///
/// `I₁` is checked against `L_b M_f |Ω| ‖φⁿ − φ‖_C V⁰₋ᵣ g(φⁿ)` and `I₂`
/// against `M_b M_f |Ω|^{3/2} V⁰₋ᵣ[g_c(φⁿ) − g_c(φ)]`.
pub fn probe_fc_continuity(
    term: &DelayTerm,
    phi: &HistorySegment,
    dir: &HistorySegment,
    n_probes: usize,
    slack: f64,
    tol: f64,
) -> Result<ProbeReport> {
    let mut report = ProbeReport::new("fc-continuity", slack);
    record_constants(&mut report, term);
    report.constant("tolerance", tol);
    let c = term.constants();
    let gm = term.measure();
    let table = term.table(phi)?;
    let state = gm.state(phi)?;
    let weights = term.node_weights().combined(&state);
    let fc = term.fc_from_table(&table, &state);
    if c.m_b.is_none() {
        report.note("growth mode: the I2 bound needs a bounded birth function and is only observed");
    }
    let mut last = f64::INFINITY;
    for (k, phin) in perturbation_sequence(phi, dir, n_probes)?.iter().enumerate() {
        let n = (k + 1) as f64;
        let dist = phin.distance(phi)?;
        let table_n = term.table(phin)?;
        let state_n = gm.state(phin)?;
        let weights_n = term.node_weights().combined(&state_n);
        let mut i1 = SpectralField::zeros(term.op().n_modes());
        let mut i2 = SpectralField::zeros(term.op().n_modes());
        for ((wn, w), (tn, t)) in weights_n
            .iter()
            .zip(&weights)
            .zip(table_n.entries().iter().zip(table.entries()))
        {
            i1.axpy(*wn, &(tn - t));
            i2.axpy(wn - w, t);
        }
        let diff = &term.fc_from_table(&table_n, &state_n) - &fc;
        let residual = diff.distance(&(&i1 + &i2));
        if residual > 1e-12 * (1.0 + diff.norm() + fc.norm()) {
            report.fail(format!("I1 + I2 misses F_c(φⁿ) − F_c(φ) by {residual:e} at n = {n}"));
        }
        report.observe(n, "dist", dist);
        let v_total = gm.total_variation_with(&state_n)?;
        report.check(n, "I1", c.l_b * c.m_f * c.omega * dist * v_total, i1.norm());
        let vdist = gm.variation_distance_c_with(&state_n, &state);
        match c.m_b {
            Some(m_b) => {
                report.check(n, "I2", m_b * c.m_f * c.omega.powf(1.5) * vdist, i2.norm());
            }
            None => report.observe(n, "I2", i2.norm()),
        }
        last = diff.norm();
        report.observe(n, "Fc_diff", last);
    }
    if !(last < tol) {
        report.fail(format!("‖F_c(φⁿ) − F_c(φ)‖ = {last:e} did not fall below {tol:e}"));
    }
    report.record_sharpness();
    Ok(report)
}

struct FdSplit {
    k1: SpectralField,
    k2: SpectralField,
    k3: SpectralField,
    diff: SpectralField,
    jump_abs_n: f64,
    jump_abs: f64,
    jump_diff: f64,
    // Σ_k |h_k(φ)| ‖φ(−η_k(φⁿ)) − φ(−η_k(φ))‖
    lag_shift: f64,
}

fn fd_split(term: &DelayTerm, phi: &HistorySegment, phin: &HistorySegment) -> Result<FdSplit> {
    let gm = term.measure();
    let s = gm.state(phi)?;
    let sn = gm.state(phin)?;
    let m = term.op().n_modes();
    let (mut k1, mut k2, mut k3) = (
        SpectralField::zeros(m),
        SpectralField::zeros(m),
        SpectralField::zeros(m),
    );
    let mut lag_shift = 0.0;
    for k in 0..s.lags.len() {
        let (eta, etan) = (s.lags[k], sn.lags[k]);
        let (h, hn) = (s.jumps[k], sn.jumps[k]);
        let phin_at_n = phin.eval_at(-etan)?;
        let phi_at_n = phi.eval_at(-etan)?;
        let phi_at = phi.eval_at(-eta)?;
        let c_phin_n = term.convolve(&phin_at_n);
        let c_phi_n = term.convolve(&phi_at_n);
        let c_phi = term.convolve(&phi_at);
        k1.axpy(hn, &(&c_phin_n - &c_phi_n));
        k2.axpy(hn - h, &c_phi_n);
        k3.axpy(h, &(&c_phi_n - &c_phi));
        lag_shift += h.abs() * phi_at_n.distance(&phi_at);
    }
    let diff = &term.fd_with(phin, None, &sn)? - &term.fd_with(phi, None, &s)?;
    Ok(FdSplit {
        k1,
        k2,
        k3,
        diff,
        jump_abs_n: sn.jumps.iter().map(|h| h.abs()).sum(),
        jump_abs: s.jumps.iter().map(|h| h.abs()).sum(),
        jump_diff: s.jumps.iter().zip(&sn.jumps).map(|(a, b)| (a - b).abs()).sum(),
        lag_shift,
    })
}

fn fd_rows(
    report: &mut ProbeReport,
    term: &DelayTerm,
    phi: &HistorySegment,
    seq: &[HistorySegment],
    tol: f64,
) -> Result<()> {
    let c = term.constants();
    let phi_c = phi.segment_norm();
    let mut last = [f64::INFINITY; 4];
    for (k, phin) in seq.iter().enumerate() {
        let n = (k + 1) as f64;
        let dist = phin.distance(phi)?;
        let sp = fd_split(term, phi, phin)?;
        let sum = &(&sp.k1 + &sp.k2) + &sp.k3;
        let residual = sum.distance(&sp.diff);
        if residual > 1e-12 * (1.0 + sp.diff.norm() + sum.norm()) {
            report.fail(format!("K1 + K2 + K3 misses F_d(φⁿ) − F_d(φ) by {residual:e} at n = {n}"));
        }
        report.observe(n, "dist", dist);
        report.check(
            n,
            "K1",
            c.l_b * c.m_f * c.omega.powf(1.5) * dist * sp.jump_abs_n,
            sp.k1.norm(),
        );
        report.check(
            n,
            "K2",
            c.m_f * (c.c1 * c.omega * phi_c + c.c2 * c.omega.powf(1.5)) * sp.jump_diff,
            sp.k2.norm(),
        );
        report.check(n, "K3", c.m_f * c.l_b * c.omega * sp.lag_shift, sp.k3.norm());
        report.observe(n, "sum_abs_h", sp.jump_abs);
        report.observe(n, "Fd_diff", sp.diff.norm());
        last = [sp.k1.norm(), sp.k2.norm(), sp.k3.norm(), sp.diff.norm()];
    }
    for (name, v) in ["K1", "K2", "K3", "Fd_diff"].iter().zip(last) {
        if !(v < tol) {
            report.fail(format!("‖{name}‖ = {v:e} did not fall below {tol:e}"));
        }
    }
    Ok(())
}

/// `F_d(φⁿ) − F_d(φ) = K₁ⁿ + K₂ⁿ + K₃ⁿ` along `φⁿ = φ + 2^{−n}ψ`, each term
/// against its stated bound.
pub fn probe_fd_continuity(
    term: &DelayTerm,
    phi: &HistorySegment,
    dir: &HistorySegment,
    n_probes: usize,
    slack: f64,
    tol: f64,
) -> Result<ProbeReport> {
    let mut report = ProbeReport::new("fd-continuity", slack);
    record_constants(&mut report, term);
    report.constant("tolerance", tol);
    if !term.measure().has_discrete() {
        report.note("no discrete part: every K term vanishes");
    }
    let seq = perturbation_sequence(phi, dir, n_probes)?;
    fd_rows(&mut report, term, phi, &seq, tol)?;
    report.record_sharpness();
    Ok(report)
}

/// One atom with lag `η(φ) = η_ign + slope J(φ)` and unit jump, along
/// `φⁿ = (1 + 2^{−n}) φ`: `J` strictly increases, so `θ₀ = −η(φ)` lies left of
/// every `−η(φⁿ)` and `g(θ₀, φⁿ) = 1 ≠ 0 = g(θ₀, φ)`, while `F_d(φⁿ) → F_d(φ)`.
///
/// `φ` is rescaled so that `J(φ) = (r − η_ign) / (4 slope)`, keeping every lag
/// inside `[η_ign, r]`.
pub fn demo_remark1(
    term: &DelayTerm,
    phi: &HistorySegment,
    slope: f64,
    n_probes: usize,
    tol: f64,
) -> Result<ProbeReport> {
    let mut report = ProbeReport::new("remark1", 0.0);
    let gm = term.measure();
    let (r, eta_ign) = (gm.r(), gm.eta_ign());
    report.constant("lag_slope", slope);
    report.constant("tolerance", tol);
    let j = ignoring_functional(phi, eta_ign);
    if slope == 0.0 || j == 0.0 {
        report.note("degenerate: the lag does not depend on this history, so no discontinuity can be shown");
        return Ok(report);
    }
    if slope < 0.0 {
        report.fail("the lag slope must be positive");
        return Ok(report);
    }
    let target = (r - eta_ign) / (4.0 * slope);
    let phi = HistorySegment::new(r, phi.frames().iter().map(|f| f.scaled((target / j).sqrt())).collect())?;
    let remark = GeneratingMeasure::new(
        r,
        DiscretePart::new(
            r,
            eta_ign,
            vec![Atom {
                lag: LagLaw::Affine { slope },
                jump: JumpLaw::Fixed { h: 1.0 },
            }],
        )?,
        AbsContPart::none(r),
        SingularPart::none(r),
    )?;
    let rterm = term.with_measure(remark.clone())?;
    let state = remark.state(&phi)?;
    let theta0 = -state.lags[0];
    report.constant("theta0", theta0);
    report.constant("J_phi", state.ignoring_value);
    let seq = perturbation_sequence(&phi, &phi, n_probes)?;
    let g0 = remark.value_with(theta0, &state);
    for (k, phin) in seq.iter().enumerate() {
        let gap = (remark.value(theta0, phin)? - g0).abs();
        report.observe((k + 1) as f64, "g_gap", gap);
        if gap != 1.0 {
            report.fail(format!("|g(θ₀, φⁿ) − g(θ₀, φ)| = {gap} ≠ 1 at n = {}", k + 1));
        }
    }
    fd_rows(&mut report, &rterm, &phi, &seq, tol)?;
    report.note("g_d(θ₀, ·) is discontinuous at φ while F_d is continuous along the same sequence");
    Ok(report)
}

/// Random pairs that agree on `[−r, −η_ign]` must give bit-identical lags and jumps.
pub fn probe_ignoring(term: &DelayTerm, n_pairs: usize, seed: u64) -> Result<ProbeReport> {
    let mut report = ProbeReport::new("ignoring", 0.0);
    let gm = term.measure();
    let (r, eta_ign) = (gm.r(), gm.eta_ign());
    report.constant("eta_ign", eta_ign);
    let (n_steps, n_modes) = (term.n_steps(), term.op().n_modes());
    let mismatches = (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let scale = rand::Rng::gen_range(&mut rng, 0.0..4.0);
            let a = random_segment(&mut rng, r, n_steps, n_modes, scale)?;
            let noise = random_segment(&mut rng, r, n_steps, n_modes, 10.0)?;
            let frames = (0..n_steps)
                .map(|k| {
                    if a.theta(k) <= -eta_ign + 1e-12 * r {
                        a.frame(k).clone()
                    } else {
                        noise.frame(k).clone()
                    }
                })
                .collect();
            let b = HistorySegment::new(r, frames)?;
            let (sa, sb) = (gm.state(&a)?, gm.state(&b)?);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            let bad = bits(&sa.lags)
                .iter()
                .zip(bits(&sb.lags))
                .chain(bits(&sa.jumps).iter().zip(bits(&sb.jumps)))
                .filter(|(x, y)| **x != *y)
                .count();
            Ok(bad)
        })
        .collect::<Result<Vec<_>>>()?;
    for (i, bad) in mismatches.into_iter().enumerate() {
        report.check(i as f64, "mismatches", 0.0, bad as f64);
    }
    Ok(report)
}
