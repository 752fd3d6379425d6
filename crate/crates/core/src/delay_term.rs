//! The delay nonlinearity
//! `F(φ)(x) = ∫_{−r}^{0} ∫_Ω b(φ(θ, y)) f(x − y) dy dg(θ, φ)`
//! and its split `F = F_c + F_d` into the continuous and discrete parts of `g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::HistorySegment;
use crate::measure::{ContinuousNodeWeights, GeneratingMeasure, MeasureState};
use crate::spatial::{Kernel, SpatialOperator, SpectralField};

/// Which hypothesis set the birth function is used under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BirthMode {
    /// `|b| ≤ M_b`; the Lipschitz, Gronwall and dissipativity constants exist.
    Bounded,
    /// Only `|b(s)| ≤ C₁|s| + C₂`.
    Growth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum BirthPreset {
    Zero,
    Constant { value: f64 },
    /// `p w e^{−w}` for `w ≥ 0`, zero for `w < 0`.
    Nicholson { p: f64 },
    /// `clamp(slope · w, −cap, cap)`.
    LinearSat { slope: f64, cap: f64 },
    /// `slope · w`; unbounded, so growth mode only.
    Linear { slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirthFunction {
    preset: BirthPreset,
    mode: BirthMode,
}

impl BirthFunction {
    pub fn new(preset: BirthPreset, mode: BirthMode) -> Result<Self> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("birth parameter {name} must be finite, got {x}")))
            }
        };
        match preset {
            BirthPreset::Zero => {}
            BirthPreset::Constant { value } => finite(value, "value")?,
            BirthPreset::Nicholson { p } => {
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::Domain(format!("nicholson p must be non-negative, got {p}")));
                }
            }
            BirthPreset::LinearSat { slope, cap } => {
                finite(slope, "slope")?;
                if !(cap >= 0.0 && cap.is_finite()) {
                    return Err(Error::Domain(format!("saturation cap must be non-negative, got {cap}")));
                }
            }
            BirthPreset::Linear { slope } => {
                finite(slope, "slope")?;
                if mode == BirthMode::Bounded && slope != 0.0 {
                    return Err(Error::Mode(
                        "the linear birth function is unbounded; use growth mode".into(),
                    ));
                }
            }
        }
        Ok(Self { preset, mode })
    }

    pub fn zero() -> Self {
        Self::new(BirthPreset::Zero, BirthMode::Bounded).expect("valid")
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(BirthPreset::Constant { value }, BirthMode::Bounded)
    }

    pub fn nicholson(p: f64) -> Result<Self> {
        Self::new(BirthPreset::Nicholson { p }, BirthMode::Bounded)
    }

    pub fn preset(&self) -> BirthPreset {
        self.preset
    }

    pub fn mode(&self) -> BirthMode {
        self.mode
    }

    pub fn eval(&self, w: f64) -> f64 {
        match self.preset {
            BirthPreset::Zero => 0.0,
            BirthPreset::Constant { value } => value,
            BirthPreset::Nicholson { p } => {
                if w > 0.0 {
                    p * w * (-w).exp()
                } else {
                    0.0
                }
            }
            BirthPreset::LinearSat { slope, cap } => (slope * w).clamp(-cap, cap),
            BirthPreset::Linear { slope } => slope * w,
        }
    }

    /// L_b.
    pub fn lipschitz(&self) -> f64 {
        match self.preset {
            BirthPreset::Zero | BirthPreset::Constant { .. } => 0.0,
            BirthPreset::Nicholson { p } => p,
            BirthPreset::LinearSat { slope, .. } | BirthPreset::Linear { slope } => slope.abs(),
        }
    }

    /// `(C₁, C₂)` with `|b(s)| ≤ C₁|s| + C₂`.
    pub fn growth_constants(&self) -> (f64, f64) {
        match self.preset {
            BirthPreset::Zero => (0.0, 0.0),
            BirthPreset::Constant { value } => (0.0, value.abs()),
            BirthPreset::Nicholson { p } => (p, 0.0),
            BirthPreset::LinearSat { slope, .. } | BirthPreset::Linear { slope } => (slope.abs(), 0.0),
        }
    }

    /// M_b, or `None` in growth mode.
    pub fn bound(&self) -> Option<f64> {
        if self.mode == BirthMode::Growth {
            return None;
        }
        Some(match self.preset {
            BirthPreset::Zero | BirthPreset::Linear { .. } => 0.0,
            BirthPreset::Constant { value } => value.abs(),
            BirthPreset::Nicholson { p } => p / std::f64::consts::E,
            BirthPreset::LinearSat { cap, .. } => cap,
        })
    }

    fn require_bound(&self) -> Result<f64> {
        self.bound().ok_or_else(|| {
            Error::Mode("this constant needs a bounded birth function (bounded mode)".into())
        })
    }

    pub fn apply(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|w| self.eval(*w)).collect()
    }
}

/// `L_{F_c} = M_f |Ω| (L_b M_{Vg_c} + M_b |Ω|^{1/2} L_{Vg_c})`.
pub fn lipschitz_constant_fc(
    m_f: f64,
    omega: f64,
    l_b: f64,
    m_vg_c: f64,
    m_b: f64,
    l_vg_c: f64,
) -> f64 {
    m_f * omega * (l_b * m_vg_c + m_b * omega.sqrt() * l_vg_c)
}

/// One convolution `∫_Ω b(φ(θ_i, y)) f(x − y) dy` per history node.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionTable {
    entries: Vec<SpectralField>,
}

impl ConvolutionTable {
    pub fn entries(&self) -> &[SpectralField] {
        &self.entries
    }

    /// The table of `shift_append(seg, frame)` given the new frame's convolution.
    pub fn shifted(&self, newest: SpectralField) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        entries.extend_from_slice(&self.entries[1..]);
        entries.push(newest);
        Self { entries }
    }

    pub fn push(&mut self, newest: SpectralField) {
        self.entries.remove(0);
        self.entries.push(newest);
    }
}

/// `F_c(φ)`, `F_d(φ)` and the measure state they were computed with.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayEvaluation {
    pub fc: SpectralField,
    pub fd: SpectralField,
    pub state: MeasureState,
}

impl DelayEvaluation {
    pub fn total(&self) -> SpectralField {
        &self.fc + &self.fd
    }
}

/// Closed-form constants of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayConstants {
    pub m_f: f64,
    pub omega: f64,
    pub l_b: f64,
    pub c1: f64,
    pub c2: f64,
    pub m_b: Option<f64>,
    pub m_vg: f64,
    pub m_vg_c: f64,
    pub l_vg_c: f64,
    pub l_fc: Option<f64>,
    pub norm_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DelayTerm {
    op: SpatialOperator,
    kernel: Kernel,
    birth: BirthFunction,
    measure: GeneratingMeasure,
    n_steps: usize,
    node_weights: ContinuousNodeWeights,
}

impl DelayTerm {
    /// `n_steps` fixes the history grid the continuous part is tabulated on.
    pub fn new(
        op: SpatialOperator,
        kernel: Kernel,
        birth: BirthFunction,
        measure: GeneratingMeasure,
        n_steps: usize,
    ) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::Domain(format!("history grid needs ≥ 2 nodes, got {n_steps}")));
        }
        let h = measure.r() / (n_steps - 1) as f64;
        let ratio = measure.eta_ign() / h;
        if measure.has_discrete() && (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "η_ign = {} must be a multiple of the history spacing {h}",
                measure.eta_ign()
            )));
        }
        let node_weights = measure.continuous_node_weights(n_steps);
        Ok(Self {
            op,
            kernel,
            birth,
            measure,
            n_steps,
            node_weights,
        })
    }

    pub fn op(&self) -> &SpatialOperator {
        &self.op
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn birth(&self) -> &BirthFunction {
        &self.birth
    }

    pub fn measure(&self) -> &GeneratingMeasure {
        &self.measure
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn node_weights(&self) -> &ContinuousNodeWeights {
        &self.node_weights
    }

    /// The same term with a different generating measure.
    pub fn with_measure(&self, measure: GeneratingMeasure) -> Result<Self> {
        Self::new(
            self.op.clone(),
            self.kernel.clone(),
            self.birth,
            measure,
            self.n_steps,
        )
    }

    /// The same term with a different birth function.
    pub fn with_birth(&self, birth: BirthFunction) -> Self {
        Self {
            birth,
            ..self.clone()
        }
    }

    /// `∫_Ω b(v(y)) f(x − y) dy`.
    pub fn convolve(&self, v: &SpectralField) -> SpectralField {
        let w = self.birth.apply(&self.op.to_grid(v));
        self.op.kernel_convolve(&w, &self.kernel)
    }

    /// Like [`convolve`](Self::convolve) with a different birth function, for
    /// probes that split `b(φ) − b(ψ)`.
    pub fn convolve_grid_values(&self, w: &[f64]) -> SpectralField {
        self.op.kernel_convolve(w, &self.kernel)
    }

    pub fn table(&self, seg: &HistorySegment) -> Result<ConvolutionTable> {
        self.check_segment(seg)?;
        Ok(ConvolutionTable {
            entries: seg.frames().iter().map(|f| self.convolve(f)).collect(),
        })
    }

    fn check_segment(&self, seg: &HistorySegment) -> Result<()> {
        if seg.n_steps() != self.n_steps || seg.n_modes() != self.op.n_modes() {
            return Err(Error::Shape(format!(
                "segment has {} nodes × {} modes, delay term expects {} × {}",
                seg.n_steps(),
                seg.n_modes(),
                self.n_steps,
                self.op.n_modes()
            )));
        }
        Ok(())
    }

    /// `F_c` from a convolution table: `Σ_i W_i(φ) T_i`.
    pub fn fc_from_table(&self, table: &ConvolutionTable, state: &MeasureState) -> SpectralField {
        let mut out = SpectralField::zeros(self.op.n_modes());
        if !self.measure.has_continuous() {
            return out;
        }
        for (w, t) in self.node_weights.combined(state).iter().zip(&table.entries) {
            if *w != 0.0 {
                out.axpy(*w, t);
            }
        }
        out
    }

    /// `F_d = Σ_k h_k ∫_Ω b(φ(−η_k, y)) f(x − y) dy`, reusing table entries
    /// for atoms that sit on a node.
    pub fn fd_with(
        &self,
        seg: &HistorySegment,
        table: Option<&ConvolutionTable>,
        state: &MeasureState,
    ) -> Result<SpectralField> {
        let mut out = SpectralField::zeros(self.op.n_modes());
        for (eta, h) in state.lags.iter().zip(&state.jumps) {
            if *h == 0.0 {
                continue;
            }
            let conv = self.atom_convolution(seg, table, *eta)?;
            out.axpy(*h, &conv);
        }
        Ok(out)
    }

    /// `∫_Ω b(φ(−η, y)) f(x − y) dy`.
    pub fn atom_convolution(
        &self,
        seg: &HistorySegment,
        table: Option<&ConvolutionTable>,
        eta: f64,
    ) -> Result<SpectralField> {
        let (i, w) = seg.locate(-eta)?;
        match table {
            Some(t) if w == 0.0 => Ok(t.entries[i].clone()),
            _ => Ok(self.convolve(&seg.eval_at(-eta)?)),
        }
    }

    pub fn evaluate_with_table(
        &self,
        seg: &HistorySegment,
        table: &ConvolutionTable,
    ) -> Result<DelayEvaluation> {
        self.check_segment(seg)?;
        let state = self.measure.state(seg)?;
        let fc = self.fc_from_table(table, &state);
        let fd = self.fd_with(seg, Some(table), &state)?;
        Ok(DelayEvaluation { fc, fd, state })
    }

    pub fn evaluate(&self, seg: &HistorySegment) -> Result<DelayEvaluation> {
        let table = self.table(seg)?;
        self.evaluate_with_table(seg, &table)
    }

    pub fn eval_f(&self, seg: &HistorySegment) -> Result<SpectralField> {
        Ok(self.evaluate(seg)?.total())
    }

    pub fn eval_fc(&self, seg: &HistorySegment) -> Result<SpectralField> {
        self.check_segment(seg)?;
        let state = self.measure.state(seg)?;
        if !self.measure.has_continuous() {
            return Ok(SpectralField::zeros(self.op.n_modes()));
        }
        Ok(self.fc_from_table(&self.table(seg)?, &state))
    }

    pub fn eval_fd(&self, seg: &HistorySegment) -> Result<SpectralField> {
        self.check_segment(seg)?;
        let state = self.measure.state(seg)?;
        self.fd_with(seg, None, &state)
    }

    /// M_b, refusing growth mode.
    pub fn birth_bound(&self) -> Result<f64> {
        self.birth.require_bound()
    }

    /// `L_{F_c}`; bounded mode only.
    pub fn lipschitz_constant_fc(&self) -> Result<f64> {
        let m_b = self.birth_bound()?;
        let mb = self.measure.bounds();
        Ok(lipschitz_constant_fc(
            self.kernel.bound(),
            self.op.domain().measure(),
            self.birth.lipschitz(),
            mb.m_vg_c,
            m_b,
            mb.l_vg_c,
        ))
    }

    /// `M_b M_f |Ω|^{3/2} M_Vg`, a uniform bound on `‖F(φ)‖`.
    pub fn norm_bound(&self) -> Result<f64> {
        let m_b = self.birth_bound()?;
        Ok(m_b * self.kernel.bound() * self.op.domain().measure().powf(1.5) * self.measure.bounds().m_vg)
    }

    /// Radius `M_b M_f |Ω|^{3/2} M_Vg / (λ₁ + d)` of the absorbing ball.
    pub fn absorbing_radius(&self) -> Result<f64> {
        Ok(self.norm_bound()? / (self.op.lambda1() + self.op.damping()))
    }

    pub fn constants(&self) -> DelayConstants {
        let mb = self.measure.bounds();
        let (c1, c2) = self.birth.growth_constants();
        DelayConstants {
            m_f: self.kernel.bound(),
            omega: self.op.domain().measure(),
            l_b: self.birth.lipschitz(),
            c1,
            c2,
            m_b: self.birth.bound(),
            m_vg: mb.m_vg,
            m_vg_c: mb.m_vg_c,
            l_vg_c: mb.l_vg_c,
            l_fc: self.lipschitz_constant_fc().ok(),
            norm_bound: self.norm_bound().ok(),
        }
    }
}
