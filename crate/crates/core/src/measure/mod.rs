//! The state-dependent generating function `g(θ, φ) = g_d + g_ac + g_s` and
//! Stieltjes integration against it.
//!
//! Every integral is a weighted sum: atoms `−η_k(φ)` with weights `h_k(φ)`,
//! fine trapezoid nodes with weights `(1 + β s(φ)) ρ₀ Δθ`, and Cantor midpoints
//! with weights `γ(φ) 2^{−m}`. Field-valued integrands that are piecewise
//! linear on the history grid (see [`ContinuousNodeWeights`]) collapse the two
//! continuous parts onto the history nodes.

pub mod cantor;
pub mod continuous;
pub mod discrete;

pub use continuous::{mean_norm_functional, AbsContPart, SingularPart};
pub use discrete::{ignoring_functional, Atom, DiscretePart, JumpLaw, LagLaw};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::history::HistorySegment;

/// Relative tolerance on the A1/A4 bound assertions.
const BOUND_RTOL: f64 = 1e-12;

/// The state-dependent quantities of `g(·, φ)` for one history `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureState {
    /// `J(φ)`, the ignoring functional.
    pub ignoring_value: f64,
    /// `I(φ)`, the full-segment mean norm.
    pub mean_norm: f64,
    pub lags: Vec<f64>,
    pub jumps: Vec<f64>,
    /// `1 + β s(φ)`.
    pub ac_factor: f64,
    /// `γ(φ)`.
    pub singular_amplitude: f64,
}

/// Closed-form constants of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureBounds {
    /// M_Vg: uniform bound on the total variation.
    pub m_vg: f64,
    /// M_{Vg_c}: uniform bound on the variation of `g_c`.
    pub m_vg_c: f64,
    /// L_{Vg_c}: Lipschitz constant of `φ ↦ g_c(·, φ)` in variation.
    pub l_vg_c: f64,
    /// Σ_k sup |h_k|.
    pub jump_sup_sum: f64,
}

/// Continuous-part weights redistributed onto the history grid nodes by
/// linear interpolation; exact for integrands that are piecewise linear on
/// that grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousNodeWeights {
    pub ac: Vec<f64>,
    pub singular: Vec<f64>,
}

impl ContinuousNodeWeights {
    /// Combined weights for a given state.
    pub fn combined(&self, state: &MeasureState) -> Vec<f64> {
        self.ac
            .iter()
            .zip(&self.singular)
            .map(|(a, s)| state.ac_factor * a + state.singular_amplitude * s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingMeasure {
    r: f64,
    discrete: DiscretePart,
    ac: AbsContPart,
    singular: SingularPart,
    variation_bound: f64,
}

impl GeneratingMeasure {
    pub fn new(
        r: f64,
        discrete: DiscretePart,
        ac: AbsContPart,
        singular: SingularPart,
    ) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(format!("delay r must be positive, got {r}")));
        }
        let mut gm = Self {
            r,
            discrete,
            ac,
            singular,
            variation_bound: 0.0,
        };
        gm.variation_bound = gm.derived_variation_bound();
        Ok(gm)
    }

    /// Replaces the derived M_Vg by a stated one, which must dominate it.
    pub fn with_variation_bound(mut self, m_vg: f64) -> Result<Self> {
        let derived = self.derived_variation_bound();
        if !(m_vg >= derived) {
            return Err(Error::Domain(format!(
                "stated M_Vg = {m_vg} is below the family's variation bound {derived}"
            )));
        }
        self.variation_bound = m_vg;
        Ok(self)
    }

    fn derived_variation_bound(&self) -> f64 {
        self.discrete.jump_sup_sum() + self.continuous_variation_sup()
    }

    fn continuous_variation_sup(&self) -> f64 {
        self.ac.base_mass() * self.ac.factor_sup() + self.singular.amplitude_sup()
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eta_ign(&self) -> f64 {
        self.discrete.eta_ign()
    }

    pub fn discrete(&self) -> &DiscretePart {
        &self.discrete
    }

    pub fn ac(&self) -> &AbsContPart {
        &self.ac
    }

    pub fn singular(&self) -> &SingularPart {
        &self.singular
    }

    pub fn has_discrete(&self) -> bool {
        !self.discrete.is_empty()
    }

    pub fn has_continuous(&self) -> bool {
        !(self.ac.is_zero() && self.singular.is_zero())
    }

    /// The same family with the discrete part removed.
    pub fn without_discrete(&self) -> Self {
        let mut gm = self.clone();
        gm.discrete = DiscretePart::empty(self.r, self.eta_ign()).expect("η_ign already valid");
        gm.variation_bound = gm.derived_variation_bound();
        gm
    }

    /// The same family with only the discrete part.
    pub fn discrete_only(&self) -> Self {
        let mut gm = self.clone();
        gm.ac = AbsContPart::none(self.r);
        gm.singular = SingularPart::none(self.r);
        gm.variation_bound = gm.derived_variation_bound();
        gm
    }

    pub fn bounds(&self) -> MeasureBounds {
        let ac_lip = self.ac.base_mass() * self.ac.beta().abs() * self.r;
        let sing_lip = self.singular.gamma1() * self.r;
        MeasureBounds {
            m_vg: self.variation_bound,
            m_vg_c: self.continuous_variation_sup(),
            l_vg_c: ac_lip + sing_lip,
            jump_sup_sum: self.discrete.jump_sup_sum(),
        }
    }

    /// Evaluates every state-dependent quantity for `φ`.
    pub fn state(&self, seg: &HistorySegment) -> Result<MeasureState> {
        self.check_segment(seg)?;
        let j = ignoring_functional(seg, self.eta_ign());
        let i = mean_norm_functional(seg);
        let (lags, jumps) = self.discrete.evaluate(j, self.r)?;
        Ok(MeasureState {
            ignoring_value: j,
            mean_norm: i,
            lags,
            jumps,
            ac_factor: self.ac.factor(i),
            singular_amplitude: self.singular.amplitude(i),
        })
    }

    fn check_segment(&self, seg: &HistorySegment) -> Result<()> {
        if seg.r() != self.r {
            return Err(Error::Shape(format!(
                "segment delay {} differs from measure delay {}",
                seg.r(),
                self.r
            )));
        }
        Ok(())
    }

    /// `Σ_k χ(−η_k) h_k`.
    pub fn discrete_integrate_with(&self, chi: impl Fn(f64) -> f64, state: &MeasureState) -> f64 {
        state
            .lags
            .iter()
            .zip(&state.jumps)
            .map(|(eta, h)| chi(-eta) * h)
            .sum()
    }

    pub fn ac_integrate_with(&self, chi: impl Fn(f64) -> f64, state: &MeasureState) -> f64 {
        let s: f64 = self
            .ac
            .nodes()
            .iter()
            .zip(self.ac.base_weights())
            .map(|(t, w)| w * chi(*t))
            .sum();
        state.ac_factor * s
    }

    pub fn singular_integrate_with(&self, chi: impl Fn(f64) -> f64, state: &MeasureState) -> f64 {
        if state.singular_amplitude == 0.0 {
            return 0.0;
        }
        let s: f64 = self.singular.atoms().into_iter().map(chi).sum();
        state.singular_amplitude * self.singular.atom_mass() * s
    }

    pub fn discrete_integrate(
        &self,
        chi: impl Fn(f64) -> f64,
        seg: &HistorySegment,
    ) -> Result<f64> {
        Ok(self.discrete_integrate_with(chi, &self.state(seg)?))
    }

    pub fn ac_integrate(&self, chi: impl Fn(f64) -> f64, seg: &HistorySegment) -> Result<f64> {
        Ok(self.ac_integrate_with(chi, &self.state(seg)?))
    }

    pub fn singular_integrate(
        &self,
        chi: impl Fn(f64) -> f64,
        seg: &HistorySegment,
    ) -> Result<f64> {
        Ok(self.singular_integrate_with(chi, &self.state(seg)?))
    }

    /// `∫_{−r}^{0} χ(θ) dg(θ, φ)`.
    pub fn stieltjes_integrate(
        &self,
        chi: impl Fn(f64) -> f64,
        seg: &HistorySegment,
    ) -> Result<f64> {
        let state = self.state(seg)?;
        Ok(self.discrete_integrate_with(&chi, &state)
            + self.ac_integrate_with(&chi, &state)
            + self.singular_integrate_with(&chi, &state))
    }

    /// `V⁰₋ᵣ g(·, φ)`, checked against M_Vg.
    pub fn total_variation(&self, seg: &HistorySegment) -> Result<f64> {
        let state = self.state(seg)?;
        self.total_variation_with(&state)
    }

    pub fn total_variation_with(&self, state: &MeasureState) -> Result<f64> {
        let v = state.jumps.iter().map(|h| h.abs()).sum::<f64>()
            + self.continuous_variation_with(state);
        if v > self.variation_bound * (1.0 + BOUND_RTOL) {
            return Err(Error::InvariantViolation(format!(
                "total variation {v} exceeds M_Vg = {}",
                self.variation_bound
            )));
        }
        Ok(v)
    }

    /// `V⁰₋ᵣ g_c(·, φ)`.
    pub fn continuous_variation_with(&self, state: &MeasureState) -> f64 {
        state.ac_factor * self.ac.base_mass() + state.singular_amplitude
    }

    /// `V⁰₋ᵣ [g_c(·, φ) − g_c(·, ψ)]`, checked against `L_{Vg_c} ‖φ − ψ‖_C`.
    pub fn variation_distance_c(&self, phi: &HistorySegment, psi: &HistorySegment) -> Result<f64> {
        let a = self.state(phi)?;
        let b = self.state(psi)?;
        let v = self.variation_distance_c_with(&a, &b);
        let bound = self.bounds().l_vg_c * phi.distance(psi)?;
        if v > bound * (1.0 + BOUND_RTOL) + f64::EPSILON * v {
            return Err(Error::InvariantViolation(format!(
                "continuous-part variation distance {v} exceeds L_Vgc ‖φ − ψ‖_C = {bound}"
            )));
        }
        Ok(v)
    }

    /// The AC and singular parts are mutually singular, so their variations add.
    pub fn variation_distance_c_with(&self, a: &MeasureState, b: &MeasureState) -> f64 {
        self.ac.base_mass() * (a.ac_factor - b.ac_factor).abs()
            + (a.singular_amplitude - b.singular_amplitude).abs()
    }

    /// `g_d(θ, φ) = Σ_k h_k 1[θ > −η_k]`.
    pub fn discrete_value_with(&self, theta: f64, state: &MeasureState) -> f64 {
        state
            .lags
            .iter()
            .zip(&state.jumps)
            .filter(|(eta, _)| theta > -**eta)
            .map(|(_, h)| h)
            .sum()
    }

    /// `g(θ, φ)` normalised by `g(−r, φ) = 0`.
    pub fn value(&self, theta: f64, seg: &HistorySegment) -> Result<f64> {
        let state = self.state(seg)?;
        Ok(self.value_with(theta, &state))
    }

    pub fn value_with(&self, theta: f64, state: &MeasureState) -> f64 {
        self.discrete_value_with(theta, state)
            + state.ac_factor * self.ac.cumulative_at(theta)
            + state.singular_amplitude * self.singular.profile(theta)
    }

    /// Lerp-distributes the fine AC nodes and the Cantor atoms onto a uniform
    /// grid of `n_steps` nodes over `[−r, 0]`.
    pub fn continuous_node_weights(&self, n_steps: usize) -> ContinuousNodeWeights {
        let spread = |points: &[f64], weight: &dyn Fn(usize) -> f64| {
            let mut out = vec![0.0; n_steps];
            let last = n_steps - 1;
            let h = self.r / last as f64;
            for (idx, t) in points.iter().enumerate() {
                let w = weight(idx);
                let pos = ((t + self.r) / h).clamp(0.0, last as f64);
                let i = (pos.floor() as usize).min(last - 1);
                let frac = pos - i as f64;
                out[i] += (1.0 - frac) * w;
                out[i + 1] += frac * w;
            }
            out
        };
        let ac_w = self.ac.base_weights();
        let ac = spread(self.ac.nodes(), &|i| ac_w[i]);
        let singular = if self.singular.is_zero() {
            vec![0.0; n_steps]
        } else {
            let m = self.singular.atom_mass();
            spread(&self.singular.atoms(), &|_| m)
        };
        ContinuousNodeWeights { ac, singular }
    }
}

/// Parameters of the built-in family: logistic lags, saturating jumps with
/// geometric weights, a uniform AC density and a Cantor singular part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefaultFamily {
    pub r: f64,
    pub eta_ign: f64,
    pub n_atoms: usize,
    pub c_decay: f64,
    pub ac_mass: f64,
    pub beta: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub cantor_depth: u32,
    pub ac_intervals: usize,
}

impl DefaultFamily {
    /// `r = 1`, `η_ign = 0.2`, 16 atoms with `c_k = 2^{−k}`, AC mass 0.5 with
    /// `β = 0.5`, `γ = 0.2 + 0.3 tanh(I)`, depth 12.
    pub fn standard(r: f64, eta_ign: f64) -> Self {
        Self {
            r,
            eta_ign,
            n_atoms: 16,
            c_decay: 0.5,
            ac_mass: 0.5,
            beta: 0.5,
            gamma0: 0.2,
            gamma1: 0.3,
            cantor_depth: 12,
            ac_intervals: 4096,
        }
    }

    pub fn build(&self) -> Result<GeneratingMeasure> {
        GeneratingMeasure::new(
            self.r,
            DiscretePart::logistic_family(self.r, self.eta_ign, self.n_atoms, self.c_decay)?,
            AbsContPart::uniform(self.r, self.ac_mass, self.beta, self.ac_intervals)?,
            SingularPart::new(self.r, self.gamma0, self.gamma1, self.cantor_depth)?,
        )
    }

    /// `Σ_{k > K} c^k`, the truncation tail of the jump series.
    pub fn truncation_tail(&self) -> f64 {
        self.c_decay.powi(self.n_atoms as i32 + 1) / (1.0 - self.c_decay)
    }
}
