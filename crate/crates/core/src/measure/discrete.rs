//! The step-function part `g_d`: atoms at `θ_k = −η_k(φ)` with jumps `h_k(φ)`.
//!
//! Every built-in lag and jump law reads the history only through
//! [`ignoring_functional`], which integrates frames with `θ ≤ −η_ign`. The
//! uniform ignoring condition therefore holds by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::HistorySegment;

const NODE_SNAP: f64 = 1e-9;

/// `J(φ) = ∫_{−r}^{−η_ign} ‖φ(s)‖² ds`, trapezoidal over the grid nodes with
/// `θ ≤ −η_ign`.
pub fn ignoring_functional(seg: &HistorySegment, eta_ign: f64) -> f64 {
    let h = seg.spacing();
    let last = ((seg.r() - eta_ign) / h + NODE_SNAP).floor();
    if last < 1.0 {
        return 0.0;
    }
    let last = (last as usize).min(seg.n_steps() - 1);
    let sq: Vec<f64> = seg.frames()[..=last]
        .iter()
        .map(|f| f.dot(f))
        .collect();
    let inner: f64 = sq[1..last].iter().sum();
    h * (0.5 * (sq[0] + sq[last]) + inner)
}

/// How an atom's lag depends on `J(φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum LagLaw {
    /// State-independent lag.
    Fixed { eta: f64 },
    /// `η_ign + (r − η_ign) σ(offset + slope J)`.
    Logistic { offset: f64, slope: f64 },
    /// `η_ign + slope J`; leaving `[η_ign, r]` is an invariant violation.
    Affine { slope: f64 },
}

impl LagLaw {
    pub fn eval(&self, j: f64, r: f64, eta_ign: f64) -> f64 {
        match *self {
            LagLaw::Fixed { eta } => eta,
            LagLaw::Logistic { offset, slope } => {
                let z = offset + slope * j;
                eta_ign + (r - eta_ign) / (1.0 + (-z).exp())
            }
            LagLaw::Affine { slope } => eta_ign + slope * j,
        }
    }

    pub fn is_state_dependent(&self) -> bool {
        match *self {
            LagLaw::Fixed { .. } => false,
            LagLaw::Logistic { slope, .. } | LagLaw::Affine { slope } => slope != 0.0,
        }
    }
}

/// How an atom's jump depends on `J(φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum JumpLaw {
    Fixed { h: f64 },
    /// `weight · tanh(1 + J)`.
    Saturating { weight: f64 },
}

impl JumpLaw {
    pub fn eval(&self, j: f64) -> f64 {
        match *self {
            JumpLaw::Fixed { h } => h,
            JumpLaw::Saturating { weight } => weight * (1.0 + j).tanh(),
        }
    }

    /// Uniform bound on `|h_k|`.
    pub fn sup(&self) -> f64 {
        match *self {
            JumpLaw::Fixed { h } => h.abs(),
            JumpLaw::Saturating { weight } => weight.abs(),
        }
    }

    pub fn is_state_dependent(&self) -> bool {
        matches!(self, JumpLaw::Saturating { weight } if *weight != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub lag: LagLaw,
    pub jump: JumpLaw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePart {
    eta_ign: f64,
    atoms: Vec<Atom>,
}

impl DiscretePart {
    pub fn new(r: f64, eta_ign: f64, atoms: Vec<Atom>) -> Result<Self> {
        if !(eta_ign > 0.0 && eta_ign <= r) {
            return Err(Error::Domain(format!(
                "η_ign must lie in (0, r = {r}], got {eta_ign}"
            )));
        }
        for (k, atom) in atoms.iter().enumerate() {
            if let LagLaw::Fixed { eta } = atom.lag {
                if !(eta >= eta_ign && eta <= r) {
                    return Err(Error::Domain(format!(
                        "atom {k}: fixed lag {eta} outside [η_ign = {eta_ign}, r = {r}]"
                    )));
                }
            }
        }
        Ok(Self { eta_ign, atoms })
    }

    /// No atoms.
    pub fn empty(r: f64, eta_ign: f64) -> Result<Self> {
        Self::new(r, eta_ign, Vec::new())
    }

    /// `K` atoms with logistic lags and jumps `c^k tanh(1 + J)`.
    pub fn logistic_family(r: f64, eta_ign: f64, n_atoms: usize, c_decay: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&c_decay) {
            return Err(Error::Domain(format!(
                "jump decay c must lie in [0, 1), got {c_decay}"
            )));
        }
        let atoms = (1..=n_atoms)
            .map(|k| {
                let offset = if n_atoms > 1 {
                    -3.0 + 6.0 * (k - 1) as f64 / (n_atoms - 1) as f64
                } else {
                    0.0
                };
                let slope = if k % 2 == 0 { 0.5 } else { -0.5 };
                Atom {
                    lag: LagLaw::Logistic { offset, slope },
                    jump: JumpLaw::Saturating {
                        weight: c_decay.powi(k as i32),
                    },
                }
            })
            .collect();
        Self::new(r, eta_ign, atoms)
    }

    pub fn eta_ign(&self) -> f64 {
        self.eta_ign
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Σ_k sup |h_k|.
    pub fn jump_sup_sum(&self) -> f64 {
        self.atoms.iter().map(|a| a.jump.sup()).sum()
    }

    /// Lags and jumps for a given value of `J(φ)`; lags are checked against `[η_ign, r]`.
    pub fn evaluate(&self, j: f64, r: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut lags = Vec::with_capacity(self.atoms.len());
        let mut jumps = Vec::with_capacity(self.atoms.len());
        for (k, atom) in self.atoms.iter().enumerate() {
            let eta = atom.lag.eval(j, r, self.eta_ign);
            if !(eta >= self.eta_ign && eta <= r) {
                return Err(Error::InvariantViolation(format!(
                    "lag η_{} = {eta} left [η_ign = {}, r = {r}]",
                    k + 1,
                    self.eta_ign
                )));
            }
            lags.push(eta);
            jumps.push(atom.jump.eval(j));
        }
        Ok((lags, jumps))
    }
}
