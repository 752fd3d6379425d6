//! Exponential Euler for the mild formulation
//! `u(t) = e^{−(A+d)t} φ(0) + ∫₀ᵗ e^{−(A+d)(t−s)} F(u_s) ds`,
//! with a fixed point on the new frame at every step.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::delay_term::{BirthMode, ConvolutionTable, DelayTerm};
use crate::error::{Error, Result};
use crate::history::HistorySegment;
use crate::spatial::{phi1, SpectralField};

const GRID_TOL: f64 = 1e-9;

/// Where the damping `d` goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampingMode {
    /// Folded into the semigroup `e^{−(A+d)t}`.
    Absorbed,
    /// Kept in the integrand as `F − d u`.
    Integrand,
}

/// Initial guess for the per-step fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointStart {
    /// Explicit exponential Euler step with `F(u_t)`.
    Predictor,
    /// The current frame `u(t)`.
    PreviousFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub damping_mode: DampingMode,
    pub fp_start: FixedPointStart,
    /// Exponents δ of the recorded `C_δ` norms.
    pub deltas: Vec<f64>,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            fp_tol: 1e-12,
            fp_max_iter: 50,
            damping_mode: DampingMode::Absorbed,
            fp_start: FixedPointStart::Predictor,
            deltas: vec![0.25],
        }
    }

    /// Number of steps to `t_end`.
    pub fn n_steps_to(&self, t_end: f64) -> Result<usize> {
        let n = t_end / self.dt;
        if !(t_end >= 0.0) || (n - n.round()).abs() > GRID_TOL * n.max(1.0) {
            return Err(Error::Domain(format!(
                "t_end = {t_end} must be a non-negative multiple of dt = {}",
                self.dt
            )));
        }
        Ok(n.round() as usize)
    }

    pub fn validate(&self, r: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        let per_window = r / self.dt;
        if (per_window - per_window.round()).abs() > GRID_TOL * per_window {
            return Err(Error::Domain(format!(
                "dt = {} must divide r = {r}",
                self.dt
            )));
        }
        if !(self.fp_tol > 0.0) {
            return Err(Error::Domain(format!("fp_tol must be positive, got {}", self.fp_tol)));
        }
        if self.fp_max_iter == 0 {
            return Err(Error::Domain("fp_max_iter must be positive".into()));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(0.0..0.5).contains(*d)) {
            return Err(Error::Domain(format!("δ = {d} outside [0, 1/2)")));
        }
        self.n_steps_to(self.t_end)?;
        Ok(())
    }
}

/// Diagnostics of a single step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub fp_iters: usize,
    pub increment: f64,
}

/// Norm diagnostics at every grid time, plus the solution frames on `[−r, T]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub times: Vec<f64>,
    pub l2_norm: Vec<f64>,
    pub c_norm: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `cdelta[k][n]` is `‖u_{t_n}‖_{C_δ}` for `δ = deltas[k]`.
    pub cdelta: Vec<Vec<f64>>,
    /// Zero for the initial row.
    pub fp_iters: Vec<usize>,
    #[serde(skip)]
    r: f64,
    #[serde(skip)]
    window: usize,
    #[serde(skip)]
    frames: Vec<SpectralField>,
}

/// Scalar summary of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub t_end: f64,
    pub final_l2_norm: f64,
    pub final_c_norm: f64,
    pub max_c_norm: f64,
    pub max_fp_iters: usize,
}

impl TrajectoryRecord {
    fn start(r: f64, dt: f64, deltas: &[f64], phi0: &HistorySegment, term: &DelayTerm) -> Result<Self> {
        let mut rec = Self {
            dt,
            times: Vec::new(),
            l2_norm: Vec::new(),
            c_norm: Vec::new(),
            deltas: deltas.to_vec(),
            cdelta: vec![Vec::new(); deltas.len()],
            fp_iters: Vec::new(),
            r,
            window: phi0.n_steps(),
            frames: phi0.frames().to_vec(),
        };
        rec.record(0, phi0, 0, term)?;
        Ok(rec)
    }

    fn record(&mut self, n: usize, seg: &HistorySegment, iters: usize, term: &DelayTerm) -> Result<()> {
        self.times.push(n as f64 * self.dt);
        self.l2_norm.push(seg.latest().norm());
        self.c_norm.push(seg.segment_norm());
        for (k, delta) in self.deltas.iter().enumerate() {
            let mut m = 0.0f64;
            for f in seg.frames() {
                m = m.max(term.op().fractional_norm(f, *delta)?);
            }
            self.cdelta[k].push(m);
        }
        self.fp_iters.push(iters);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `u(t_n)`.
    pub fn frame_at(&self, n: usize) -> &SpectralField {
        &self.frames[n + self.window - 1]
    }

    /// The segment `u_{t_n}`.
    pub fn segment_at(&self, n: usize) -> HistorySegment {
        HistorySegment::new(self.r, self.frames[n..n + self.window].to_vec())
            .expect("recorded frames form a valid segment")
    }

    pub fn final_segment(&self) -> HistorySegment {
        self.segment_at(self.len() - 1)
    }

    pub fn stats(&self) -> RunStats {
        RunStats {
            steps: self.len() - 1,
            t_end: *self.times.last().expect("non-empty"),
            final_l2_norm: *self.l2_norm.last().expect("non-empty"),
            final_c_norm: *self.c_norm.last().expect("non-empty"),
            max_c_norm: self.c_norm.iter().copied().fold(0.0, f64::max),
            max_fp_iters: self.fp_iters.iter().copied().max().unwrap_or(0),
        }
    }

    /// Columns `t, l2_norm, c_norm, cdelta_<δ>…, fp_iters`; 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,l2_norm,c_norm");
        for d in &self.deltas {
            let _ = write!(out, ",cdelta_{d}");
        }
        out.push_str(",fp_iters\n");
        for n in 0..self.len() {
            let _ = write!(out, "{:.16e},{:.16e},{:.16e}", self.times[n], self.l2_norm[n], self.c_norm[n]);
            for col in &self.cdelta {
                let _ = write!(out, ",{:.16e}", col[n]);
            }
            let _ = writeln!(out, ",{}", self.fp_iters[n]);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Solver {
    term: DelayTerm,
    cfg: SolverConfig,
    decay: Vec<f64>,
    weight: Vec<f64>,
    // damping inside the integrand, zero when absorbed
    integrand_damping: f64,
}

impl Solver {
    pub fn new(term: DelayTerm, cfg: SolverConfig) -> Result<Self> {
        let r = term.measure().r();
        cfg.validate(r)?;
        let h = r / (term.n_steps() - 1) as f64;
        if (cfg.dt - h).abs() > GRID_TOL * h {
            return Err(Error::Domain(format!(
                "dt = {} must equal the history spacing r/(n_steps − 1) = {h}",
                cfg.dt
            )));
        }
        if term.measure().has_discrete() {
            let ratio = term.measure().eta_ign() / cfg.dt;
            if (ratio - ratio.round()).abs() > GRID_TOL * ratio {
                return Err(Error::Domain(format!(
                    "η_ign = {} must be a multiple of dt = {}",
                    term.measure().eta_ign(),
                    cfg.dt
                )));
            }
        }
        if term.birth().mode() == BirthMode::Bounded {
            let l = term.lipschitz_constant_fc()?;
            if cfg.dt * l >= 1.0 {
                return Err(Error::Domain(format!(
                    "dt · L_Fc = {} must be below 1 for the per-step fixed point",
                    cfg.dt * l
                )));
            }
        }
        let d = term.op().damping();
        let shift = match cfg.damping_mode {
            DampingMode::Absorbed => d,
            DampingMode::Integrand => 0.0,
        };
        let (decay, weight) = term
            .op()
            .eigenvalues()
            .iter()
            .map(|lam| {
                let z = (lam + shift) * cfg.dt;
                ((-z).exp(), cfg.dt * phi1(z))
            })
            .unzip();
        Ok(Self {
            integrand_damping: d - shift,
            term,
            cfg,
            decay,
            weight,
        })
    }

    pub fn term(&self) -> &DelayTerm {
        &self.term
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// The same solver with a different fixed-point start.
    pub fn with_fp_start(&self, start: FixedPointStart) -> Self {
        let mut s = self.clone();
        s.cfg.fp_start = start;
        s
    }

    fn update(&self, base: &SpectralField, f: &SpectralField, guess: &SpectralField) -> SpectralField {
        let c = base
            .coeffs()
            .iter()
            .zip(f.coeffs())
            .zip(guess.coeffs())
            .zip(&self.weight)
            .map(|(((b, fj), g), w)| b + w * (fj - self.integrand_damping * g))
            .collect();
        SpectralField::from_coeffs(c)
    }

    /// Advances `u_t` to `u_{t+dt}`.
    pub fn step(&self, seg: &HistorySegment) -> Result<(HistorySegment, StepInfo)> {
        let table = self.term.table(seg)?;
        let (seg, _, info) = self.step_with_table(seg, &table)?;
        Ok((seg, info))
    }

    pub fn step_with_table(
        &self,
        seg: &HistorySegment,
        table: &ConvolutionTable,
    ) -> Result<(HistorySegment, ConvolutionTable, StepInfo)> {
        let last = seg.latest();
        let base = SpectralField::from_coeffs(
            last.coeffs().iter().zip(&self.decay).map(|(c, a)| a * c).collect(),
        );
        let mut guess = match self.cfg.fp_start {
            FixedPointStart::Predictor => {
                let f = self.term.evaluate_with_table(seg, table)?.total();
                self.update(&base, &f, last)
            }
            FixedPointStart::PreviousFrame => last.clone(),
        };
        let mut increment = f64::INFINITY;
        for iter in 1..=self.cfg.fp_max_iter {
            let cand = seg.shift_append(guess.clone());
            let cand_table = table.shifted(self.term.convolve(&guess));
            let f = self.term.evaluate_with_table(&cand, &cand_table)?.total();
            let next = self.update(&base, &f, &guess);
            increment = next.distance(&guess);
            guess = next;
            if increment < self.cfg.fp_tol {
                let conv = self.term.convolve(&guess);
                return Ok((
                    seg.shift_append(guess),
                    table.shifted(conv),
                    StepInfo {
                        fp_iters: iter,
                        increment,
                    },
                ));
            }
        }
        Err(Error::FixedPoint {
            iterations: self.cfg.fp_max_iter,
            increment,
        })
    }

    /// Runs to `cfg.t_end`.
    pub fn integrate(&self, phi0: &HistorySegment) -> Result<TrajectoryRecord> {
        self.integrate_observed(phi0, self.cfg.t_end, |_, _, _| Ok(()))
    }

    /// Runs to `t_end`, calling `observer(n, t_n, u_{t_n})` after every step.
    pub fn integrate_observed(
        &self,
        phi0: &HistorySegment,
        t_end: f64,
        mut observer: impl FnMut(usize, f64, &HistorySegment) -> Result<()>,
    ) -> Result<TrajectoryRecord> {
        let n_total = self.cfg.n_steps_to(t_end)?;
        let mut rec = TrajectoryRecord::start(phi0.r(), self.cfg.dt, &self.cfg.deltas, phi0, &self.term)?;
        observer(0, 0.0, phi0)?;
        let mut seg = phi0.clone();
        let mut table = self.term.table(&seg)?;
        for n in 1..=n_total {
            let t = n as f64 * self.cfg.dt;
            let (next, next_table, info) =
                self.step_with_table(&seg, &table).map_err(|e| Error::StepFailure {
                    time: t,
                    source: Box::new(e),
                })?;
            seg = next;
            table = next_table;
            rec.frames.push(seg.latest().clone());
            rec.record(n, &seg, info.fp_iters, &self.term)?;
            observer(n, t, &seg)?;
        }
        Ok(rec)
    }

    /// Integrates in blocks of `⌊η_ign / (2 dt)⌋` steps, checking at every step
    /// that `F_d` of the live segment equals `F_d` of the flat extension of the
    /// block-start segment.
    pub fn chain_by_ignoring(&self, phi0: &HistorySegment) -> Result<TrajectoryRecord> {
        let eta_ign = self.term.measure().eta_ign();
        let block = (eta_ign / (2.0 * self.cfg.dt) + GRID_TOL).floor() as usize;
        if block == 0 {
            return Err(Error::Domain(format!(
                "η_ign / 2 = {} is shorter than one step dt = {}",
                eta_ign / 2.0,
                self.cfg.dt
            )));
        }
        let mut block_start = phi0.clone();
        let measure = self.term.measure();
        self.integrate_observed(phi0, self.cfg.t_end, |n, t, seg| {
            let j = n % block;
            if j == 0 {
                block_start = seg.clone();
            }
            let ext = block_start.extend_flat(j as f64 * self.cfg.dt, eta_ign)?;
            let live = self.term.fd_with(seg, None, &measure.state(seg)?)?;
            let flat = self.term.fd_with(&ext, None, &measure.state(&ext)?)?;
            if live != flat {
                return Err(Error::InvariantViolation(format!(
                    "F_d of the live segment differs from F_d of its flat extension at t = {t} (‖Δ‖ = {:e})",
                    live.distance(&flat)
                )));
            }
            Ok(())
        })
    }
}
