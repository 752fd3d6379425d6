//! The `run`, `verify` and `converge` subcommands. Each returns a process exit
//! code: 0 on success, 1 when the computation or a probe fails.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use sdd_core::verify::{self, ProbeReport, DEMONSTRATIONS};

use crate::config::RunConfig;
use crate::problem::{self, Problem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

fn config_json(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serialises")
}

fn constants_json(p: &Problem) -> Value {
    let term = p.term();
    json!({
        "delay_term": term.constants(),
        "measure": term.measure().bounds(),
        "L_Fc": term.lipschitz_constant_fc().ok(),
        "M_Vg": term.measure().bounds().m_vg,
        "absorbing_radius": term.absorbing_radius().ok(),
        "lambda1": term.op().lambda1(),
        "d": term.op().damping(),
    })
}

/// Integrates the configured problem; writes `trajectory.csv` and `summary.json`.
pub fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let p = problem::build(cfg)?;
    let mut summary = json!({
        "command": "run",
        "config": config_json(cfg),
        "constants": constants_json(&p),
    });
    match p.solver.integrate(&p.phi0) {
        Ok(rec) => {
            write_atomic(&out.join("trajectory.csv"), &rec.to_csv())?;
            summary["status"] = json!("ok");
            summary["stats"] = json!(rec.stats());
            write_atomic(&out.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            summary["status"] = json!("step-failure");
            summary["error"] = json!(format!("{e}: {}", std::error::Error::source(&e).map(|s| s.to_string()).unwrap_or_default()));
            write_atomic(&out.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
            Ok(EXIT_FAILED)
        }
    }
}

fn error_report(name: &str, slack: f64, e: impl std::fmt::Display) -> ProbeReport {
    let mut r = ProbeReport::new(name, slack);
    r.fail(format!("probe aborted: {e}"));
    r
}

/// Runs one named probe on the configured problem.
pub fn run_probe(cfg: &RunConfig, p: &Problem, name: &str) -> ProbeReport {
    let v = &cfg.verify;
    let term = p.term();
    let phi = &p.phi0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dir = verify::random_segment(&mut rng, cfg.r(), term.n_steps(), term.op().n_modes(), 1.0);
    let result = dir.map_err(anyhow::Error::from).and_then(|dir| -> Result<ProbeReport> {
        Ok(match name {
            "ignoring" => verify::probe_ignoring(term, v.n_pairs, cfg.seed)?,
            "lipschitz" => verify::probe_lipschitz(term, v.n_pairs, cfg.seed, v.slack)?,
            "fc-continuity" => {
                verify::probe_fc_continuity(term, phi, &dir, v.n_probes, v.slack, v.tolerance)?
            }
            "fd-continuity" => {
                verify::probe_fd_continuity(term, phi, &dir, v.n_probes, v.slack, v.tolerance)?
            }
            "remark1" => verify::demo_remark1(term, phi, v.remark_slope, v.n_probes, v.tolerance)?,
            "gronwall" => {
                let psi = phi.add_scaled(v.gronwall_distance / dir.segment_norm(), &dir)?;
                verify::probe_gronwall(&p.solver, phi, &psi, v.gronwall_t_end, v.slack)?
            }
            "dissipativity" => {
                verify::probe_dissipativity(&p.solver, phi, v.dissipativity_t_end, v.slack)?.0
            }
            "convergence" => convergence_report(cfg)?,
            other => anyhow::bail!("unknown probe {other:?}"),
        })
    });
    result.unwrap_or_else(|e| error_report(name, v.slack, format!("{e:#}")))
}

/// Runs the selected probes; writes `probe_<name>.json`, `probe_<name>.csv`
/// and `summary.json`. Demonstrations never affect the exit code.
pub fn cmd_verify(cfg: &RunConfig, out: &Path, probes: &[&str]) -> Result<i32> {
    let p = problem::build(cfg)?;
    let mut passed = BTreeMap::new();
    let mut all_ok = true;
    for name in probes {
        let report = run_probe(cfg, &p, name);
        let file = name.replace('-', "_");
        write_atomic(&out.join(format!("probe_{file}.json")), &report.to_json())?;
        write_atomic(&out.join(format!("probe_{file}.csv")), &report.to_csv())?;
        let status = if report.passed { "pass" } else { "FAIL" };
        println!("{name:<14} {status}");
        if !report.passed && !DEMONSTRATIONS.contains(name) {
            all_ok = false;
        }
        passed.insert(name.to_string(), json!({ "passed": report.passed, "constants": report.constants }));
    }
    let summary = json!({
        "command": "verify",
        "config": config_json(cfg),
        "constants": constants_json(&p),
        "probes": passed,
        "all_passed": all_ok,
    });
    write_atomic(&out.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    Ok(if all_ok { EXIT_OK } else { EXIT_FAILED })
}

pub fn convergence_report(cfg: &RunConfig) -> Result<ProbeReport> {
    let c = &cfg.converge;
    Ok(verify::convergence_study(
        |dt| {
            let p = problem::build_with_dt(cfg, dt, c.t_end).map_err(|e| {
                sdd_core::Error::Domain(format!("building the problem for dt = {dt}: {e:#}"))
            })?;
            Ok((p.solver, p.phi0))
        },
        &c.dt_list,
        c.t_end,
        c.min_order,
        c.exact_tol,
    )?)
}

/// `dt, final_l2, diff_to_next, order`; the order sits on the row of the finer step.
pub fn order_table(report: &ProbeReport, dt_list: &[f64]) -> String {
    let pick = |q: &str, dt: f64| {
        report
            .series(q)
            .iter()
            .find(|r| r.index == dt)
            .map(|r| format!("{:.16e}", r.observed))
            .unwrap_or_default()
    };
    let mut out = String::from("dt,final_l2,diff_to_next,order\n");
    for dt in dt_list {
        let _ = writeln!(
            out,
            "{dt:.16e},{},{},{}",
            pick("final_l2", *dt),
            pick("diff", *dt),
            pick("order", *dt)
        );
    }
    out
}

/// Runs the step-refinement study; writes `order_table.csv` and `probe_convergence.json`.
pub fn cmd_converge(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let report = convergence_report(cfg)?;
    write_atomic(&out.join("order_table.csv"), &order_table(&report, &cfg.converge.dt_list))?;
    write_atomic(&out.join("probe_convergence.json"), &report.to_json())?;
    if let Some(order) = report.constants.get("observed_order") {
        println!("observed order {order:.4}");
    } else {
        println!("differences at rounding level");
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILED })
}
