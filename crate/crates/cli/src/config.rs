//! The TOML run configuration.
//!
//! Physical parameters (`delay.r`, `birth.p` for the Nicholson preset,
//! `solver.d`) have no defaults. Validation reports every problem at once,
//! each naming its field.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sdd_core::delay_term::{BirthMode, BirthPreset};
use sdd_core::solver::{DampingMode, FixedPointStart};
use sdd_core::verify::{DEFAULT_SLACK, PROBE_NAMES};

/// All validation failures of one config, in field order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problems):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub domain: DomainSection,
    pub delay: DelaySection,
    pub measure: MeasureSection,
    pub birth: BirthSection,
    pub kernel: KernelSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub converge: ConvergeSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(default = "default_length")]
    pub length: f64,
    pub n_modes: usize,
    pub n_grid: usize,
}

fn default_length() -> f64 {
    std::f64::consts::PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySection {
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    pub eta_ign: f64,
    #[serde(default = "default_atoms")]
    pub n_atoms: usize,
    #[serde(default = "default_decay")]
    pub c_decay: f64,
    /// Logistic lags and saturating jumps when true; fixed ones otherwise.
    #[serde(default = "yes")]
    pub state_dependent_atoms: bool,
    pub ac_mass: f64,
    pub beta: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    #[serde(default = "default_depth")]
    pub cantor_depth: u32,
    #[serde(default = "default_ac_intervals")]
    pub ac_intervals: usize,
    /// Stated M_Vg; must dominate the family's own bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_vg: Option<f64>,
}

fn default_atoms() -> usize {
    16
}

fn default_decay() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

fn default_depth() -> u32 {
    12
}

fn default_ac_intervals() -> usize {
    4096
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BirthKind {
    Nicholson,
    LinearSat,
    Linear,
    Constant,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirthSection {
    pub preset: BirthKind,
    #[serde(default = "bounded")]
    pub mode: BirthMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

fn bounded() -> BirthMode {
    BirthMode::Bounded
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Constant,
    GaussianBump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub preset: KernelKind,
    /// M_f for both presets.
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    pub d: Option<f64>,
    #[serde(default = "default_fp_tol")]
    pub fp_tol: f64,
    #[serde(default = "default_fp_max_iter")]
    pub fp_max_iter: usize,
    #[serde(default = "absorbed")]
    pub damping_mode: DampingMode,
    #[serde(default = "predictor")]
    pub fp_start: FixedPointStart,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
}

fn default_fp_tol() -> f64 {
    1e-12
}

fn default_fp_max_iter() -> usize {
    50
}

fn absorbed() -> DampingMode {
    DampingMode::Absorbed
}

fn predictor() -> FixedPointStart {
    FixedPointStart::Predictor
}

fn default_deltas() -> Vec<f64> {
    vec![0.25]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// `c_j(θ) = amplitude (1 + ½ sin(2θ + j)) / j²`.
    Smooth,
    /// A single eigenmode, constant in time.
    Mode,
    /// Seeded random frames with `c_j ~ amplitude U(−1, 1) / j`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub preset: InitialKind,
    pub amplitude: f64,
    #[serde(default = "first")]
    pub mode: usize,
}

fn first() -> usize {
    1
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            preset: InitialKind::Smooth,
            amplitude: 1.0,
            mode: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub probes: Vec<String>,
    pub slack: f64,
    pub n_probes: usize,
    pub tolerance: f64,
    pub n_pairs: usize,
    pub gronwall_t_end: f64,
    pub gronwall_distance: f64,
    pub dissipativity_t_end: f64,
    pub remark_slope: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            probes: vec!["all".into()],
            slack: DEFAULT_SLACK,
            n_probes: 30,
            tolerance: 1e-8,
            n_pairs: 1000,
            gronwall_t_end: 2.0,
            gronwall_distance: 1e-3,
            dissipativity_t_end: 10.0,
            remark_slope: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    pub dt_list: Vec<f64>,
    pub t_end: f64,
    pub min_order: f64,
    pub exact_tol: f64,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            dt_list: vec![0.04, 0.02, 0.01],
            t_end: 2.0,
            min_order: 0.9,
            exact_tol: 1e-12,
        }
    }
}

/// `x / step` is an integer up to relative rounding.
fn is_multiple(x: f64, step: f64) -> bool {
    let q = x / step;
    (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigErrors> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigErrors(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigErrors> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// `delay.r`; only meaningful after validation.
    pub fn r(&self) -> f64 {
        self.delay.r.unwrap_or(f64::NAN)
    }

    pub fn damping(&self) -> f64 {
        self.solver.d.unwrap_or(f64::NAN)
    }

    pub fn birth_preset(&self) -> Option<BirthPreset> {
        let b = &self.birth;
        Some(match b.preset {
            BirthKind::Nicholson => BirthPreset::Nicholson { p: b.p? },
            BirthKind::LinearSat => BirthPreset::LinearSat {
                slope: b.slope?,
                cap: b.cap?,
            },
            BirthKind::Linear => BirthPreset::Linear { slope: b.slope? },
            BirthKind::Constant => BirthPreset::Constant { value: b.value? },
            BirthKind::Zero => BirthPreset::Zero,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errs = Vec::new();
        let mut err = |field: &str, msg: String| errs.push(format!("{field}: {msg}"));

        let d = &self.domain;
        if !(d.length.is_finite() && d.length > 0.0) {
            err("domain.length", format!("must be positive, got {}", d.length));
        }
        if d.n_modes == 0 {
            err("domain.n_modes", "must be at least 1".into());
        }
        if d.n_grid < 2 * d.n_modes {
            err("domain.n_grid", format!("must be ≥ 2·n_modes = {}, got {}", 2 * d.n_modes, d.n_grid));
        }

        let r = match self.delay.r {
            None => {
                err("delay.r", "is required (no default)".into());
                None
            }
            Some(r) if !(r.is_finite() && r > 0.0) => {
                err("delay.r", format!("must be positive, got {r}"));
                None
            }
            Some(r) => Some(r),
        };

        let s = &self.solver;
        let dt_ok = s.dt.is_finite() && s.dt > 0.0;
        if !dt_ok {
            err("solver.dt", format!("must be positive, got {}", s.dt));
        } else if let Some(r) = r {
            if !is_multiple(r, s.dt) {
                err("solver.dt", format!("{} does not divide delay.r = {r}", s.dt));
            }
        }
        if !(s.t_end >= 0.0) {
            err("solver.t_end", format!("must be non-negative, got {}", s.t_end));
        } else if dt_ok && !is_multiple(s.t_end, s.dt) {
            err("solver.t_end", format!("{} is not a multiple of solver.dt = {}", s.t_end, s.dt));
        }
        match s.d {
            None => err("solver.d", "is required (no default)".into()),
            Some(d) if !(d.is_finite() && d >= 0.0) => {
                err("solver.d", format!("must be non-negative, got {d}"))
            }
            _ => {}
        }
        if !(s.fp_tol > 0.0) {
            err("solver.fp_tol", format!("must be positive, got {}", s.fp_tol));
        }
        if s.fp_max_iter == 0 {
            err("solver.fp_max_iter", "must be positive".into());
        }
        for delta in &s.deltas {
            if !(0.0..0.5).contains(delta) {
                err("solver.deltas", format!("{delta} outside [0, 1/2)"));
            }
        }

        let m = &self.measure;
        if let Some(r) = r {
            if !(m.eta_ign > 0.0 && m.eta_ign < r) {
                err("measure.eta_ign", format!("must lie in (0, r = {r}), got {}", m.eta_ign));
            } else if dt_ok && m.n_atoms > 0 && !is_multiple(m.eta_ign, s.dt) {
                err("measure.eta_ign", format!("{} is not a multiple of solver.dt = {}", m.eta_ign, s.dt));
            }
        }
        if !(0.0..1.0).contains(&m.c_decay) {
            err("measure.c_decay", format!("must lie in [0, 1), got {}", m.c_decay));
        }
        if !(m.ac_mass >= 0.0) {
            err("measure.ac_mass", format!("must be non-negative, got {}", m.ac_mass));
        }
        if !(m.beta >= -1.0) {
            err("measure.beta", format!("must be ≥ −1, got {}", m.beta));
        }
        if !(m.gamma0 >= 0.0) {
            err("measure.gamma0", format!("must be non-negative, got {}", m.gamma0));
        }
        if !(m.gamma1 >= 0.0) {
            err("measure.gamma1", format!("must be non-negative, got {}", m.gamma1));
        }
        if m.cantor_depth == 0 || m.cantor_depth > 24 {
            err("measure.cantor_depth", format!("must lie in 1..=24, got {}", m.cantor_depth));
        }
        if m.ac_intervals == 0 {
            err("measure.ac_intervals", "must be positive".into());
        }

        let b = &self.birth;
        let need = |v: Option<f64>, name: &str, errs: &mut Vec<String>| {
            if v.is_none() {
                errs.push(format!("birth.{name}: is required for preset {:?} (no default)", b.preset));
            }
        };
        match b.preset {
            BirthKind::Nicholson => need(b.p, "p", &mut errs),
            BirthKind::LinearSat => {
                need(b.slope, "slope", &mut errs);
                need(b.cap, "cap", &mut errs);
            }
            BirthKind::Linear => {
                need(b.slope, "slope", &mut errs);
                if b.mode == BirthMode::Bounded {
                    errs.push("birth.mode: the linear preset is unbounded and needs growth mode".into());
                }
            }
            BirthKind::Constant => need(b.value, "value", &mut errs),
            BirthKind::Zero => {}
        }
        let mut err = |field: &str, msg: String| errs.push(format!("{field}: {msg}"));

        let k = &self.kernel;
        if !(k.amplitude.is_finite() && k.amplitude >= 0.0) {
            err("kernel.amplitude", format!("must be non-negative, got {}", k.amplitude));
        }
        if k.preset == KernelKind::GaussianBump && !k.width.is_some_and(|w| w > 0.0) {
            err("kernel.width", "a positive width is required for gaussian-bump".into());
        }

        if self.initial.mode == 0 || self.initial.mode > d.n_modes {
            err("initial.mode", format!("must lie in 1..={}, got {}", d.n_modes, self.initial.mode));
        }
        if !self.initial.amplitude.is_finite() {
            err("initial.amplitude", "must be finite".into());
        }

        let v = &self.verify;
        for p in &v.probes {
            if p != "all" && !PROBE_NAMES.contains(&p.as_str()) {
                err("verify.probes", format!("unknown probe {p:?}; valid: all, {}", PROBE_NAMES.join(", ")));
            }
        }
        if !(v.slack >= 0.0) {
            err("verify.slack", format!("must be non-negative, got {}", v.slack));
        }
        if v.n_probes == 0 {
            err("verify.n_probes", "must be positive".into());
        }
        if dt_ok {
            for (name, t) in [("verify.gronwall_t_end", v.gronwall_t_end), ("verify.dissipativity_t_end", v.dissipativity_t_end)] {
                if !(t >= 0.0 && is_multiple(t, s.dt)) {
                    err(name, format!("{t} is not a non-negative multiple of solver.dt = {}", s.dt));
                }
            }
        }
        if !(v.gronwall_distance > 0.0) {
            err("verify.gronwall_distance", format!("must be positive, got {}", v.gronwall_distance));
        }

        let c = &self.converge;
        if c.dt_list.len() < 2 || c.dt_list.windows(2).any(|w| !(w[1] < w[0])) {
            err("converge.dt_list", format!("needs ≥ 2 strictly decreasing steps, got {:?}", c.dt_list));
        }
        if let Some(r) = r {
            for dt in &c.dt_list {
                if !(*dt > 0.0 && is_multiple(r, *dt)) {
                    err("converge.dt_list", format!("{dt} does not divide delay.r = {r}"));
                } else {
                    if !is_multiple(c.t_end, *dt) {
                        err("converge.t_end", format!("{} is not a multiple of {dt}", c.t_end));
                    }
                    if m.n_atoms > 0 && !is_multiple(m.eta_ign, *dt) {
                        err("converge.dt_list", format!("measure.eta_ign is not a multiple of {dt}"));
                    }
                }
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errs))
        }
    }

    /// Resolves a comma-separated selector, `all` meaning every probe.
    pub fn select_probes(selector: &[String]) -> Result<Vec<&'static str>, ConfigErrors> {
        let mut out = Vec::new();
        let mut bad = Vec::new();
        for item in selector.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
            if item == "all" {
                for p in PROBE_NAMES {
                    if !out.contains(&p) {
                        out.push(p);
                    }
                }
            } else if let Some(p) = PROBE_NAMES.iter().find(|p| **p == item) {
                if !out.contains(p) {
                    out.push(*p);
                }
            } else {
                bad.push(format!(
                    "--probes: unknown probe {item:?}; valid names: all, {}",
                    PROBE_NAMES.join(", ")
                ));
            }
        }
        if !bad.is_empty() {
            return Err(ConfigErrors(bad));
        }
        if out.is_empty() {
            return Err(ConfigErrors(vec!["--probes: no probe selected".into()]));
        }
        Ok(out)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const NICHOLSON: &str = r#"
seed = 3

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
t_end = 5.0
d = 0.1
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml(NICHOLSON).unwrap();
        assert_eq!(cfg.r(), 1.0);
        assert_eq!(cfg.verify.n_pairs, 1000);
        let echo = cfg.to_toml();
        let back = RunConfig::from_toml(&echo).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), echo);
    }

    #[test]
    fn lists_every_problem_with_its_field() {
        let text = NICHOLSON
            .replace("r = 1.0", "")
            .replace("p = 2.0", "")
            .replace("d = 0.1", "")
            .replace("n_grid = 32", "n_grid = 8");
        let errs = RunConfig::from_toml(&text).unwrap_err().0;
        for field in ["delay.r", "birth.p", "solver.d", "domain.n_grid"] {
            assert!(errs.iter().any(|e| e.starts_with(field)), "{field} missing from {errs:?}");
        }
    }

    #[test]
    fn dt_must_divide_r() {
        let errs = RunConfig::from_toml(&NICHOLSON.replace("dt = 0.05", "dt = 0.3"))
            .unwrap_err()
            .0;
        assert!(errs.iter().any(|e| e.starts_with("solver.dt")));
    }

    #[test]
    fn probe_selection() {
        assert_eq!(RunConfig::select_probes(&["all".into()]).unwrap().len(), PROBE_NAMES.len());
        assert_eq!(
            RunConfig::select_probes(&["gronwall,remark1".into()]).unwrap(),
            vec!["gronwall", "remark1"]
        );
        let e = RunConfig::select_probes(&["nope".into()]).unwrap_err();
        assert!(e.0[0].contains("valid names"));
    }
}
