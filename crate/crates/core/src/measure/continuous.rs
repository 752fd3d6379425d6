//! The continuous part `g_c = g_ac + g_s`.
//!
//! Both parts depend on the history through `tanh(I(φ))` with
//! `I(φ) = ∫_{−r}^{0} ‖φ(s)‖ ds`. `I` is `r`-Lipschitz in `‖·‖_C` and `tanh`
//! is 1-Lipschitz, so the state factors are Lipschitz with constant `r`.
//! Unlike the discrete part they read the whole segment.

use crate::error::{Error, Result};
use crate::history::HistorySegment;

use super::cantor::{cantor_function, cantor_midpoints, MAX_DEPTH};

/// `I(φ) = ∫_{−r}^{0} ‖φ(s)‖ ds`, trapezoidal over the grid nodes.
pub fn mean_norm_functional(seg: &HistorySegment) -> f64 {
    let n = seg.n_steps();
    let norms: Vec<f64> = seg.frames().iter().map(|f| f.norm()).collect();
    let inner: f64 = norms[1..n - 1].iter().sum();
    seg.spacing() * (0.5 * (norms[0] + norms[n - 1]) + inner)
}

/// `g_ac(θ, φ) = (1 + β s(φ)) ∫_{−r}^{θ} ρ₀`, `s(φ) = tanh(I(φ))`.
///
/// The base density is tabulated on a uniform fine grid of `[−r, 0]` and
/// integrated with the trapezoidal rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsContPart {
    r: f64,
    beta: f64,
    nodes: Vec<f64>,
    // trapezoid weight times density at each node
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl AbsContPart {
    pub fn from_density(
        r: f64,
        intervals: usize,
        beta: f64,
        density: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::Domain("AC quadrature needs at least one interval".into()));
        }
        if !(beta >= -1.0 && beta.is_finite()) {
            return Err(Error::Domain(format!(
                "β must be finite and ≥ −1 so that 1 + β s ≥ 0, got {beta}"
            )));
        }
        let h = r / intervals as f64;
        let nodes: Vec<f64> = (0..=intervals)
            .map(|i| if i == intervals { 0.0 } else { -r + i as f64 * h })
            .collect();
        let rho: Vec<f64> = nodes.iter().map(|&t| density(t)).collect();
        if let Some((i, v)) = rho.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::Domain(format!(
                "density must be non-negative, ρ₀({}) = {v}",
                nodes[i]
            )));
        }
        let weights: Vec<f64> = rho
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if i == 0 || i == intervals {
                    0.5 * h * p
                } else {
                    h * p
                }
            })
            .collect();
        let mut cumulative = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in rho.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Ok(Self {
            r,
            beta,
            nodes,
            weights,
            cumulative,
        })
    }

    /// `ρ₀ ≡ mass / r`.
    pub fn uniform(r: f64, mass: f64, beta: f64, intervals: usize) -> Result<Self> {
        if !(mass >= 0.0) {
            return Err(Error::Domain(format!("AC mass must be non-negative, got {mass}")));
        }
        Self::from_density(r, intervals, beta, |_| mass / r)
    }

    pub fn none(r: f64) -> Self {
        Self::uniform(r, 0.0, 0.0, 1).expect("zero density is valid")
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezoid weight times `ρ₀` at each node.
    pub fn base_weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ ρ₀`.
    pub fn base_mass(&self) -> f64 {
        *self.cumulative.last().expect("nonempty")
    }

    pub fn is_zero(&self) -> bool {
        self.base_mass() == 0.0
    }

    /// `1 + β tanh(I)`.
    pub fn factor(&self, mean_norm: f64) -> f64 {
        1.0 + self.beta * mean_norm.tanh()
    }

    /// Largest possible factor over all histories.
    pub fn factor_sup(&self) -> f64 {
        1.0 + self.beta.max(0.0)
    }

    /// `∫_{−r}^{θ} ρ₀` with linear interpolation inside a fine cell.
    pub fn cumulative_at(&self, theta: f64) -> f64 {
        if theta <= -self.r {
            return 0.0;
        }
        if theta >= 0.0 {
            return self.base_mass();
        }
        let m = self.nodes.len() - 1;
        let pos = (theta + self.r) / self.r * m as f64;
        let i = (pos.floor() as usize).min(m - 1);
        let w = pos - i as f64;
        (1.0 - w) * self.cumulative[i] + w * self.cumulative[i + 1]
    }
}

/// `g_s(θ, φ) = γ(φ) c((θ + r) / r)` with `γ(φ) = γ₀ + γ₁ tanh(I(φ))` and `c`
/// the Cantor function, integrated through its depth-`m` midpoint atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularPart {
    r: f64,
    gamma0: f64,
    gamma1: f64,
    depth: u32,
}

impl SingularPart {
    pub fn new(r: f64, gamma0: f64, gamma1: f64, depth: u32) -> Result<Self> {
        if !(gamma0 >= 0.0 && gamma1 >= 0.0) {
            return Err(Error::Domain(format!(
                "singular amplitudes must be non-negative, got γ₀ = {gamma0}, γ₁ = {gamma1}"
            )));
        }
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::Domain(format!(
                "Cantor depth must lie in 1..={MAX_DEPTH}, got {depth}"
            )));
        }
        Ok(Self {
            r,
            gamma0,
            gamma1,
            depth,
        })
    }

    pub fn none(r: f64) -> Self {
        Self {
            r,
            gamma0: 0.0,
            gamma1: 0.0,
            depth: 1,
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn is_zero(&self) -> bool {
        self.gamma0 == 0.0 && self.gamma1 == 0.0
    }

    pub fn amplitude(&self, mean_norm: f64) -> f64 {
        self.gamma0 + self.gamma1 * mean_norm.tanh()
    }

    /// Γ_max.
    pub fn amplitude_sup(&self) -> f64 {
        self.gamma0 + self.gamma1
    }

    /// Atom positions in `[−r, 0]`; each carries mass `2^{−m}`.
    pub fn atoms(&self) -> Vec<f64> {
        cantor_midpoints(self.depth)
            .into_iter()
            .map(|x| -self.r + self.r * x)
            .collect()
    }

    pub fn atom_mass(&self) -> f64 {
        0.5f64.powi(self.depth as i32)
    }

    /// Unit-amplitude profile `c((θ + r)/r)`.
    pub fn profile(&self, theta: f64) -> f64 {
        cantor_function((theta + self.r) / self.r)
    }
}
