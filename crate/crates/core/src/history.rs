//! History segments `u_t(θ) = u(t + θ)`, `θ ∈ [−r, 0]`, on a uniform time grid.

use crate::error::{Error, Result};
use crate::spatial::SpectralField;

/// Relative tolerance for snapping a lag onto a grid node.
const NODE_SNAP: f64 = 1e-9;

/// A discretised element of C([−r, 0]; L²(Ω)). Frame 0 sits at `θ = −r`,
/// the last frame at `θ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySegment {
    r: f64,
    frames: Vec<SpectralField>,
}

impl HistorySegment {
    pub fn new(r: f64, frames: Vec<SpectralField>) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(format!("delay r must be positive, got {r}")));
        }
        if frames.len() < 2 {
            return Err(Error::Domain(format!(
                "a segment needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        let n = frames[0].len();
        if frames.iter().any(|f| f.len() != n) {
            return Err(Error::Shape("frames have differing mode counts".into()));
        }
        Ok(Self { r, frames })
    }

    pub fn constant(r: f64, n_steps: usize, v: &SpectralField) -> Result<Self> {
        Self::new(r, vec![v.clone(); n_steps])
    }

    /// Samples `theta ↦ field` at the grid nodes.
    pub fn from_fn(r: f64, n_steps: usize, f: impl Fn(f64) -> SpectralField) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::Domain("a segment needs at least 2 frames".into()));
        }
        let h = r / (n_steps - 1) as f64;
        let frames = (0..n_steps)
            .map(|i| f(-r + i as f64 * h))
            .collect();
        Self::new(r, frames)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n_steps(&self) -> usize {
        self.frames.len()
    }

    pub fn n_modes(&self) -> usize {
        self.frames[0].len()
    }

    /// h_t = r / (n_steps − 1).
    pub fn spacing(&self) -> f64 {
        self.r / (self.frames.len() - 1) as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        if i + 1 == self.frames.len() {
            0.0
        } else {
            -self.r + i as f64 * self.spacing()
        }
    }

    pub fn frames(&self) -> &[SpectralField] {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> &SpectralField {
        &self.frames[i]
    }

    /// The value at `θ = 0`.
    pub fn latest(&self) -> &SpectralField {
        self.frames.last().expect("segment has frames")
    }

    /// Piecewise-linear interpolation in time; exact at grid nodes.
    pub fn eval_at(&self, theta: f64) -> Result<SpectralField> {
        let (i, w) = self.locate(theta)?;
        if w == 0.0 {
            Ok(self.frames[i].clone())
        } else {
            Ok(SpectralField::lerp(&self.frames[i], &self.frames[i + 1], w))
        }
    }

    /// Bracketing node `i` and weight `w` of node `i + 1` for a lag `θ`.
    pub fn locate(&self, theta: f64) -> Result<(usize, f64)> {
        let tol = NODE_SNAP * self.r;
        if !(theta >= -self.r - tol && theta <= tol) {
            return Err(Error::Domain(format!(
                "lag θ = {theta} outside [-{}, 0]",
                self.r
            )));
        }
        let last = self.frames.len() - 1;
        let pos = ((theta + self.r) / self.spacing()).clamp(0.0, last as f64);
        let nearest = pos.round();
        if (pos - nearest).abs() < NODE_SNAP {
            return Ok((nearest as usize, 0.0));
        }
        let i = (pos.floor() as usize).min(last - 1);
        Ok((i, pos - i as f64))
    }

    /// ‖φ‖_C realised as the maximum frame norm.
    pub fn segment_norm(&self) -> f64 {
        self.frames.iter().map(SpectralField::norm).fold(0.0, f64::max)
    }

    /// ‖φ − ψ‖_C.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max))
    }

    /// `self + alpha * other`, frame by frame.
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| {
                let mut f = a.clone();
                f.axpy(alpha, b);
                f
            })
            .collect();
        Ok(Self { r: self.r, frames })
    }

    /// Drops the oldest frame and appends `new_frame` at `θ = 0`.
    pub fn shift_append(&self, new_frame: SpectralField) -> Self {
        let mut out = self.clone();
        out.push(new_frame);
        out
    }

    /// In-place variant of [`shift_append`](Self::shift_append).
    pub fn push(&mut self, new_frame: SpectralField) {
        debug_assert_eq!(new_frame.len(), self.n_modes());
        self.frames.remove(0);
        self.frames.push(new_frame);
    }

    /// The segment `(φ̄)_s` of the flat extension `φ̄(τ) = φ(0)` for
    /// `τ ∈ (0, η_ign)`: `(φ̄)_s(θ) = φ(θ + s)` for `θ ≤ −s`, `φ(0)` after.
    pub fn extend_flat(&self, s: f64, eta_ign: f64) -> Result<Self> {
        if !(s >= 0.0 && s < eta_ign) {
            return Err(Error::Domain(format!(
                "extension shift s = {s} must lie in [0, η_ign = {eta_ign})"
            )));
        }
        let h = self.spacing();
        let shift = s / h;
        let last = self.frames.len() - 1;
        if (shift - shift.round()).abs() < NODE_SNAP {
            let k = (shift.round() as usize).min(last);
            let mut frames: Vec<SpectralField> = self.frames[k..].to_vec();
            frames.resize(self.frames.len(), self.latest().clone());
            return Ok(Self { r: self.r, frames });
        }
        let frames = (0..=last)
            .map(|i| {
                let tau = self.theta(i) + s;
                if tau >= 0.0 {
                    Ok(self.latest().clone())
                } else {
                    self.eval_at(tau)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { r: self.r, frames })
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.frames.len() != other.frames.len()
            || self.n_modes() != other.n_modes()
            || self.r != other.r
        {
            return Err(Error::Shape(format!(
                "segments differ in shape: ({}, {}, {}) vs ({}, {}, {})",
                self.r,
                self.frames.len(),
                self.n_modes(),
                other.r,
                other.frames.len(),
                other.n_modes()
            )));
        }
        Ok(())
    }
}
