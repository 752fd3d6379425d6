//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdd_cli::commands::convergence_report;
use sdd_cli::config::RunConfig;
use sdd_cli::problem::{self, Problem};
use sdd_core::measure::{AbsContPart, DiscretePart, GeneratingMeasure, SingularPart};
use sdd_core::solver::{FixedPointStart, Solver};
use sdd_core::verify::{self, random_segment, random_smooth_segment};
use sdd_core::HistorySegment;

const BASE: &str = r#"
seed = 11

[domain]
n_modes = 16
n_grid = 32

[delay]
r = 1.0

[measure]
eta_ign = 0.2
ac_mass = 0.5
beta = 0.5
gamma0 = 0.2
gamma1 = 0.3

[birth]
preset = "nicholson"
p = 2.0

[kernel]
preset = "gaussian-bump"
amplitude = 1.0
width = 0.5

[solver]
dt = 0.05
t_end = 2.0
d = 0.1
"#;

const SLACK: f64 = 0.1;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn config(edit: impl Fn(String) -> String) -> RunConfig {
    RunConfig::from_toml(&edit(BASE.to_string())).unwrap_or_else(|e| panic!("{e}"))
}

fn nicholson() -> Problem {
    problem::build(&config(|s| s)).unwrap()
}

/// Ternary-digit evaluation of the Cantor function.
fn cantor(mut x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let (mut v, mut scale) = (0.0, 0.5);
    for _ in 0..64 {
        x *= 3.0;
        if x < 1.0 {
        } else if x < 2.0 {
            return v + scale;
        } else {
            v += scale;
            x -= 2.0;
        }
        scale *= 0.5;
    }
    v
}

fn trapezoid_norm_integral(seg: &HistorySegment) -> f64 {
    let n = seg.n_steps();
    let h = seg.r() / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            w * h * seg.frame(i).norm()
        })
        .sum()
}

fn stieltjes_oracle() -> Outcome {
    let p = nicholson();
    let gm = p.term().measure();
    let cfg = config(|s| s);
    let m = &cfg.measure;
    let r = cfg.r();
    const CELLS: usize = 1_000_000;
    // g_c increments split into the AC and Cantor shapes, shared by all pairs
    let cantor_at: Vec<f64> = (0..=CELLS).map(|i| cantor(i as f64 / CELLS as f64)).collect();
    let mids: Vec<f64> = (0..CELLS).map(|i| -r + r * (i as f64 + 0.5) / CELLS as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let scale = rng.gen_range(0.0..3.0);
        let phi = random_smooth_segment(&mut rng, r, p.term().n_steps(), 16, scale).unwrap();
        let (a0, a1, w, b) = (
            rng.gen_range(1.0..2.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..6.0),
            rng.gen_range(0.0..TAU),
        );
        let chi = |t: f64| a0 + a1 * (w * t + b).sin();
        let got = gm.stieltjes_integrate(chi, &phi).unwrap();

        let state = gm.state(&phi).unwrap();
        let s = trapezoid_norm_integral(&phi).tanh();
        let ac_factor = 1.0 + m.beta * s;
        let gamma = m.gamma0 + m.gamma1 * s;
        let atoms: f64 = state.lags.iter().zip(&state.jumps).map(|(e, h)| chi(-e) * h).sum();
        let dg_ac = ac_factor * m.ac_mass / CELLS as f64;
        let cont: f64 = mids
            .iter()
            .enumerate()
            .map(|(i, t)| chi(*t) * (dg_ac + gamma * (cantor_at[i + 1] - cantor_at[i])))
            .sum();
        let want = atoms + cont;
        worst = worst.max((got - want).abs() / want.abs());
    }
    let single = GeneratingMeasure::new(
        1.0,
        DiscretePart::empty(1.0, 0.2).unwrap(),
        AbsContPart::none(1.0),
        SingularPart::new(1.0, 1.0, 0.0, 12).unwrap(),
    )
    .unwrap();
    let seg = HistorySegment::constant(1.0, 21, &sdd_core::SpectralField::zeros(4)).unwrap();
    let x2 = single.singular_integrate(|t| (t + 1.0).powi(2), &seg).unwrap();
    let cantor_err = (x2 - 0.375).abs();
    outcome(
        worst <= 1e-6 && cantor_err <= 1e-3,
        format!("max rel err {worst:.2e} over 100 pairs (≤ 1e-6); ∫x² dc = {x2:.6} (|err| {cantor_err:.1e} ≤ 1e-3)"),
    )
}

fn ignoring_exact() -> Outcome {
    let p = nicholson();
    let term = p.term();
    let gm = term.measure();
    let (r, eta) = (gm.r(), gm.eta_ign());
    let n = term.n_steps();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut mismatches = 0usize;
    for _ in 0..1000 {
        let scale = rng.gen_range(0.0..4.0);
        let a = random_segment(&mut rng, r, n, 16, scale).unwrap();
        let noise = random_segment(&mut rng, r, n, 16, 5.0).unwrap();
        let frames = (0..n)
            .map(|k| if a.theta(k) <= -eta + 1e-9 * r { a.frame(k) } else { noise.frame(k) }.clone())
            .collect();
        let b = HistorySegment::new(r, frames).unwrap();
        let (sa, sb) = (gm.state(&a).unwrap(), gm.state(&b).unwrap());
        mismatches += sa
            .lags
            .iter()
            .zip(&sb.lags)
            .chain(sa.jumps.iter().zip(&sb.jumps))
            .filter(|(x, y)| x.to_bits() != y.to_bits())
            .count();
    }
    let probe = verify::probe_ignoring(term, 1000, 7).unwrap();
    outcome(
        mismatches == 0 && probe.passed,
        format!("{mismatches} mismatching lag/jump bits over 1000 pairs; probe {}", pass(probe.passed)),
    )
}

fn lipschitz() -> Outcome {
    let p = nicholson();
    let term = p.term();
    let cfg = config(|s| s);
    let m = &cfg.measure;
    // closed form from the configuration alone
    let (m_f, omega, l_b, m_b) = (1.0, PI, 2.0, 2.0 / std::f64::consts::E);
    let m_vgc = m.ac_mass * (1.0 + m.beta) + m.gamma0 + m.gamma1;
    let l_vgc = cfg.r() * (m.ac_mass * m.beta + m.gamma1);
    let l_fc = m_f * omega * (l_b * m_vgc + m_b * omega.sqrt() * l_vgc);
    let used = term.lipschitz_constant_fc().unwrap();
    let report = verify::probe_lipschitz(term, 1000, 303, SLACK).unwrap();
    let rows = report.series("Fc_diff");
    let violations = rows
        .iter()
        .filter(|r| r.observed > r.bound.unwrap() * (1.0 + SLACK))
        .count();
    let worst = rows
        .iter()
        .map(|r| r.observed / r.bound.unwrap())
        .fold(0.0, f64::max);
    let same = ((used - l_fc) / l_fc).abs() < 1e-12;
    outcome(
        violations == 0 && rows.len() == 1000 && same && report.passed,
        format!("L_Fc = {used:.6} (closed form {l_fc:.6}); {violations} violations in {} pairs, max ratio {worst:.3}", rows.len()),
    )
}

fn continuity() -> Outcome {
    let p = nicholson();
    let term = p.term();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let dir = random_segment(&mut rng, 1.0, term.n_steps(), 16, 1.0).unwrap();
    let fc = verify::probe_fc_continuity(term, &p.phi0, &dir, 30, SLACK, 1e-8).unwrap();
    let fd = verify::probe_fd_continuity(term, &p.phi0, &dir, 30, SLACK, 1e-8).unwrap();
    let last = |r: &verify::ProbeReport, q: &str| r.series(q).last().map(|x| x.observed).unwrap_or(f64::NAN);
    let bounded = |r: &verify::ProbeReport, qs: &[&str]| {
        qs.iter().all(|q| {
            let rows = r.series(q);
            !rows.is_empty()
                && rows
                    .iter()
                    .filter(|x| x.index <= 20.0)
                    .all(|x| x.observed <= x.bound.unwrap() * (1.0 + SLACK))
        })
    };
    let (fc_end, fd_end) = (last(&fc, "Fc_diff"), last(&fd, "Fd_diff"));
    outcome(
        fc.passed
            && fd.passed
            && fc_end < 1e-8
            && fd_end < 1e-8
            && bounded(&fc, &["I1", "I2"])
            && bounded(&fd, &["K1", "K2", "K3"]),
        format!("‖ΔF_c‖ → {fc_end:.1e}, ‖ΔF_d‖ → {fd_end:.1e}; I1, I2, K1, K2, K3 within bounds for n ≤ 20"),
    )
}

fn remark1() -> Outcome {
    let p = nicholson();
    let report = verify::demo_remark1(p.term(), &p.phi0, 1.0, 30, 1e-8).unwrap();
    let gaps = report.series("g_gap");
    let all_one = !gaps.is_empty() && gaps.iter().all(|g| g.observed == 1.0);
    let fd_end = report.series("Fd_diff").last().map(|x| x.observed).unwrap_or(f64::NAN);
    outcome(
        report.passed && all_one && fd_end < 1e-8,
        format!("|Δg(θ₀)| = 1 for all {} n; ‖ΔF_d‖ → {fd_end:.1e}", gaps.len()),
    )
}

fn gronwall() -> Outcome {
    let p = nicholson();
    let term = p.term();
    let off = Solver::new(
        term.with_measure(term.measure().without_discrete()).unwrap(),
        p.solver.config().clone(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (mut off_ok, mut on_ok) = (0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let phi = random_smooth_segment(&mut rng, 1.0, term.n_steps(), 16, 2.0).unwrap();
        let dir = random_segment(&mut rng, 1.0, term.n_steps(), 16, 1.0).unwrap();
        let dist = 10f64.powf(rng.gen_range(-4.0..-1.0));
        let psi = phi.add_scaled(dist / dir.segment_norm(), &dir).unwrap();
        let a = verify::probe_gronwall(&off, &phi, &psi, 2.0, SLACK).unwrap();
        let b = verify::probe_gronwall(&p.solver, &phi, &psi, 2.0, SLACK).unwrap();
        off_ok += a.passed as usize;
        on_ok += b.passed as usize;
        for row in a.series("c_dist") {
            worst = worst.max(row.observed / row.bound.unwrap());
        }
    }
    outcome(
        off_ok == 20 && on_ok == 20,
        format!("discrete off {off_ok}/20, max ratio {worst:.2e}; discrete on with measured G {on_ok}/20"),
    )
}

fn uniqueness() -> Outcome {
    let cfg = config(|s| s.replace("t_end = 2.0", "t_end = 5.0"));
    let p = problem::build(&cfg).unwrap();
    let tol = cfg.solver.fp_tol;
    let a = p.solver.integrate(&p.phi0).unwrap();
    let b = p
        .solver
        .with_fp_start(FixedPointStart::PreviousFrame)
        .integrate(&p.phi0)
        .unwrap();
    let c = p.solver.chain_by_ignoring(&p.phi0).unwrap();
    let max_gap = |x: &sdd_core::TrajectoryRecord, y: &sdd_core::TrajectoryRecord| {
        assert_eq!(x.len(), y.len());
        (0..x.len())
            .map(|n| x.frame_at(n).distance(y.frame_at(n)))
            .fold(0.0, f64::max)
    };
    let (seeds, chain) = (max_gap(&a, &b), max_gap(&a, &c));
    outcome(
        seeds < tol && chain < tol,
        format!("fixed-point starts differ by {seeds:.1e}, chained vs plain {chain:.1e} (fp_tol {tol:.0e})"),
    )
}

fn self_convergence() -> Outcome {
    let nich = convergence_report(&config(|s| s)).unwrap();
    let orders: Vec<f64> = nich.series("order").iter().map(|r| r.observed).collect();
    let in_range = !orders.is_empty() && orders.iter().all(|o| (0.9..=1.5).contains(o));
    let max_diff = |cfg: RunConfig| {
        let r = convergence_report(&cfg).unwrap();
        let d = r.series("diff").iter().map(|x| x.observed).fold(0.0, f64::max);
        (r.passed, d)
    };
    let (zero_ok, zero_d) = max_diff(config(|s| s.replace("preset = \"nicholson\"\np = 2.0", "preset = \"zero\"")));
    let (const_ok, const_d) = max_diff(config(|s| {
        s.replace("preset = \"nicholson\"\np = 2.0", "preset = \"constant\"\nvalue = 0.7")
            .replace("beta = 0.5", "beta = 0.0\nstate_dependent_atoms = false")
            .replace("gamma1 = 0.3", "gamma1 = 0.0")
    }));
    let eps = 1e-12;
    outcome(
        nich.passed && in_range && zero_ok && const_ok && zero_d < eps && const_d < eps,
        format!("Nicholson orders {orders:.4?}; b ≡ 0 max diff {zero_d:.1e}; constant F max diff {const_d:.1e}"),
    )
}

fn dissipativity() -> Outcome {
    let cfg = config(|s| format!("{s}\n[initial]\npreset = \"smooth\"\namplitude = 20.0\n"));
    let p = problem::build(&cfg).unwrap();
    let (report, rec) = verify::probe_dissipativity(&p.solver, &p.phi0, 10.0, SLACK).unwrap();
    let radius = report.constants["ball_radius"];
    let entry = report.constants.get("entry_time").copied().unwrap_or(f64::NAN);
    let sup = report.constants.get("sup_cdelta_0.25").copied().unwrap_or(f64::NAN);
    let outside = rec.c_norm[0] > radius;
    outcome(
        report.passed && outside && sup.is_finite(),
        format!(
            "‖φ₀‖_C = {:.2} enters radius {radius:.4} at t = {entry:.2} and stays; sup C_0.25 on [5, 10] = {sup:.4}",
            rec.c_norm[0]
        ),
    )
}

fn run_all(dir: &Path, config: &Path) -> bool {
    let exe = env!("CARGO_BIN_EXE_sdd");
    ["run", "verify", "converge"].iter().all(|cmd| {
        Command::new(exe)
            .args([*cmd, "--config"])
            .arg(config)
            .arg("--out")
            .arg(dir)
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
    })
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("config.toml");
    let text = format!("{BASE}\n[verify]\nn_pairs = 200\n");
    std::fs::write(&cfg_path, text).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    if !(run_all(&a, &cfg_path) && run_all(&b, &cfg_path)) {
        return outcome(false, "a CLI invocation failed");
    }
    let (ca, cb) = (csvs(&a), csvs(&b));
    outcome(
        ca.len() == 10 && ca == cb,
        format!("{} CSV files identical byte for byte across two runs", ca.len()),
    )
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("stieltjes quadrature oracle", stieltjes_oracle),
        ("ignoring condition exactness", ignoring_exact),
        ("F_c Lipschitz bound", lipschitz),
        ("F_c / F_d continuity", continuity),
        ("g discontinuous, F_d continuous", remark1),
        ("continuous dependence", gronwall),
        ("uniqueness surrogate", uniqueness),
        ("self-convergence", self_convergence),
        ("dissipativity", dissipativity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        println!(
            "criterion {:>2}  {:<32} {}  {}  [{:.1}s]",
            i + 1,
            name,
            pass(o.passed),
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += !o.passed as usize;
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
