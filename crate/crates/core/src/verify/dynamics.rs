//! Probes on the solution map: continuous dependence, the absorbing ball and
//! self-convergence under step refinement.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::history::HistorySegment;
use crate::solver::{Solver, TrajectoryRecord};

use super::ProbeReport;

/// Two runs from `φ` and `ψ`. Without a discrete part checks
/// `‖u_t − v_t‖_C ≤ e^{L_{F_c} t} ‖φ − ψ‖_C`; with one, checks
/// `‖u_t − v_t‖_C ≤ G(t) e^{L_{F_c} t}` with
/// `G(t) = ‖φ − ψ‖_C + ∫₀ᵗ ‖F_d(u_τ) − F_d(v_τ)‖ dτ` measured by trapezoid.
pub fn probe_gronwall(
    solver: &Solver,
    phi: &HistorySegment,
    psi: &HistorySegment,
    t_end: f64,
    slack: f64,
) -> Result<ProbeReport> {
    let mut report = ProbeReport::new("gronwall", slack);
    let term = solver.term();
    let l_fc = term.lipschitz_constant_fc()?;
    report.constant("L_Fc", l_fc);
    report.constant("T", t_end);
    let with_discrete = term.measure().has_discrete();
    report.note(if with_discrete {
        "discrete part on: bound G(t) e^{L_Fc t} with G measured along the runs"
    } else {
        "discrete part off: bound e^{L_Fc t} ‖φ − ψ‖_C"
    });
    let (u, v) = rayon::join(
        || solver.integrate_observed(phi, t_end, |_, _, _| Ok(())),
        || solver.integrate_observed(psi, t_end, |_, _, _| Ok(())),
    );
    let (u, v) = (u?, v?);
    let d0 = phi.distance(psi)?;
    report.constant("initial_distance", d0);
    let dt = solver.config().dt;
    let mut g = d0;
    let mut prev_fd = 0.0;
    for n in 0..u.len() {
        let t = u.times[n];
        let (us, vs) = (u.segment_at(n), v.segment_at(n));
        let dist = us.distance(&vs)?;
        let bound = if with_discrete {
            let fd = term.eval_fd(&us)?.distance(&term.eval_fd(&vs)?);
            if n > 0 {
                g += 0.5 * dt * (prev_fd + fd);
            }
            prev_fd = fd;
            report.observe(t, "Fd_diff", fd);
            report.observe(t, "G", g);
            g * (l_fc * t).exp()
        } else {
            d0 * (l_fc * t).exp()
        };
        report.check(t, "c_dist", bound, dist);
    }
    Ok(report)
}

/// Long run from `φ₀`: entry into and stay in the ball of radius
/// `max(R₀ (1 + slack), slack)` with `R₀ = M_b M_f |Ω|^{3/2} M_Vg / (λ₁ + d)`,
/// and the supremum of each recorded `C_δ` norm over `[T/2, T]`.
pub fn probe_dissipativity(
    solver: &Solver,
    phi0: &HistorySegment,
    t_end: f64,
    slack: f64,
) -> Result<(ProbeReport, TrajectoryRecord)> {
    let mut report = ProbeReport::new("dissipativity", slack);
    let term = solver.term();
    let r0 = term.absorbing_radius()?;
    let radius = (r0 * (1.0 + slack)).max(slack);
    report.constant("norm_bound", term.norm_bound()?);
    report.constant("absorbing_radius", r0);
    report.constant("ball_radius", radius);
    report.constant("T", t_end);
    let rec = solver.integrate_observed(phi0, t_end, |_, _, _| Ok(()))?;
    let entry = rec.c_norm.iter().position(|c| *c <= radius);
    for (t, c) in rec.times.iter().zip(&rec.c_norm) {
        report.observe(*t, "c_norm", *c);
    }
    match entry {
        Some(k) => {
            report.constant("entry_time", rec.times[k]);
            for n in k..rec.len() {
                report.check_abs(rec.times[n], "c_norm_after_entry", radius, rec.c_norm[n]);
            }
        }
        None => report.fail(format!("‖u_t‖_C never entered the ball of radius {radius} by T = {t_end}")),
    }
    let half = rec.times.iter().position(|t| *t >= 0.5 * t_end).unwrap_or(0);
    for (delta, col) in rec.deltas.iter().zip(&rec.cdelta) {
        let sup = col[half..].iter().copied().fold(0.0, f64::max);
        report.observe(*delta, "sup_cdelta_second_half", sup);
        report.constant(&format!("sup_cdelta_{delta}"), sup);
        if !sup.is_finite() {
            report.fail(format!("C_{delta} norm is not finite on [T/2, T]"));
        }
    }
    Ok((report, rec))
}

/// Final frames at `T` for each `dt`; successive differences and observed
/// orders `log(d_i / d_{i+1}) / log(dt_i / dt_{i+1})`. Passes when every
/// difference is below `exact_tol`, or when the differences decrease and every
/// order is at least `min_order`.
pub fn convergence_study(
    make: impl Fn(f64) -> Result<(Solver, HistorySegment)> + Sync,
    dt_list: &[f64],
    t_end: f64,
    min_order: f64,
    exact_tol: f64,
) -> Result<ProbeReport> {
    if dt_list.len() < 2 || dt_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain(format!(
            "dt list must hold at least two strictly decreasing steps, got {dt_list:?}"
        )));
    }
    let mut report = ProbeReport::new("convergence", 0.0);
    report.constant("T", t_end);
    report.constant("min_order", min_order);
    report.constant("exact_tol", exact_tol);
    let finals = dt_list
        .par_iter()
        .map(|dt| {
            let (solver, phi0) = make(*dt)?;
            let rec = solver.integrate_observed(&phi0, t_end, |_, _, _| Ok(()))?;
            Ok(rec.frame_at(rec.len() - 1).clone())
        })
        .collect::<Result<Vec<_>>>()?;
    for (dt, f) in dt_list.iter().zip(&finals) {
        report.observe(*dt, "final_l2", f.norm());
    }
    let diffs: Vec<f64> = finals.windows(2).map(|w| w[0].distance(&w[1])).collect();
    for (dt, d) in dt_list.iter().zip(&diffs) {
        report.observe(*dt, "diff", *d);
    }
    if diffs.iter().all(|d| *d < exact_tol) {
        report.note("all differences below the exactness tolerance");
        return Ok(report);
    }
    let mut min_seen = f64::INFINITY;
    for i in 0..diffs.len().saturating_sub(1) {
        let order = (diffs[i] / diffs[i + 1]).ln() / (dt_list[i] / dt_list[i + 1]).ln();
        report.observe(dt_list[i + 1], "order", order);
        min_seen = min_seen.min(order);
    }
    if diffs.windows(2).any(|w| !(w[1] < w[0])) {
        report.fail("differences are not monotonically decreasing");
    }
    if diffs.len() < 2 {
        report.fail("an order needs at least three step sizes");
    } else if !(min_seen >= min_order) {
        report.fail(format!("observed order {min_seen} below {min_order}"));
    }
    report.constant("observed_order", min_seen);
    Ok(report)
}
