//! The spatial setting: Ω = (0, L) with the Dirichlet Laplacian.
//!
//! Fields are stored as coefficients against the orthonormal eigenbasis
//! `e_j(x) = sqrt(2/L) sin(j π x / L)`, `j = 1..=N`. The physical grid has
//! `n_grid` uniform intervals (so `n_grid + 1` points including both walls);
//! with `n_grid >= 2N` the trapezoidal rule is exactly orthonormal on the
//! retained modes, so grid and coefficient views convert losslessly.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this argument `phi1` switches to its Taylor series.
pub const PHI1_SERIES_SWITCH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub length: f64,
    pub n_modes: usize,
    pub n_grid: usize,
}

impl DomainConfig {
    pub fn new(length: f64, n_modes: usize, n_grid: usize) -> Result<Self> {
        let cfg = Self {
            length,
            n_modes,
            n_grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Ω = (0, π) with the minimal admissible grid.
    pub fn interval_pi(n_modes: usize) -> Result<Self> {
        Self::new(PI, n_modes, 2 * n_modes)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Domain(format!(
                "domain length must be positive, got {}",
                self.length
            )));
        }
        if self.n_modes == 0 {
            return Err(Error::Domain("n_modes must be at least 1".into()));
        }
        if self.n_grid < 2 * self.n_modes {
            return Err(Error::Domain(format!(
                "n_grid = {} must be at least 2 * n_modes = {}",
                self.n_grid,
                2 * self.n_modes
            )));
        }
        Ok(())
    }

    /// |Ω|.
    pub fn measure(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_grid as f64
    }

    pub fn grid_points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..=self.n_grid).map(|i| i as f64 * h).collect()
    }

    /// Trapezoidal weights on the grid; they sum to `length`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n_grid + 1];
        w[0] = 0.5 * h;
        w[self.n_grid] = 0.5 * h;
        w
    }
}

/// An element of L²(Ω) in sine-series coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(n_modes: usize) -> Self {
        Self {
            coeffs: vec![0.0; n_modes],
        }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// The unit eigenmode `e_j` (1-based `j`).
    pub fn mode(n_modes: usize, j: usize) -> Self {
        let mut f = Self::zeros(n_modes);
        f.coeffs[j - 1] = 1.0;
        f
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// L²(Ω) norm via Parseval.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &Self) {
        debug_assert_eq!(self.len(), x.len());
        for (a, b) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
        }
    }

    /// ‖self − other‖.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `(1 − w) a + w b`, coefficient-wise.
    pub fn lerp(a: &Self, b: &Self, w: f64) -> Self {
        Self {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| (1.0 - w) * x + w * y)
                .collect(),
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scaled(self)
    }
}

/// `(1 − e^{−z}) / z`, continuous at zero.
pub fn phi1(z: f64) -> f64 {
    if z < PHI1_SERIES_SWITCH {
        1.0 - z / 2.0 + z * z / 6.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// A + dI on the Dirichlet interval: eigenvalues, the damping, and the
/// sine evaluation matrix used to move between grid and coefficients.
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    domain: DomainConfig,
    damping: f64,
    eigenvalues: Vec<f64>,
    // row-major (n_grid + 1) x n_modes: e_j(x_i)
    basis: Vec<f64>,
    weights: Vec<f64>,
}

impl SpatialOperator {
    pub fn new(domain: DomainConfig, damping: f64) -> Result<Self> {
        domain.validate()?;
        if !(damping.is_finite() && damping >= 0.0) {
            return Err(Error::Domain(format!(
                "damping d must be non-negative, got {damping}"
            )));
        }
        let n = domain.n_modes;
        let l = domain.length;
        let eigenvalues = (1..=n)
            .map(|j| {
                let k = j as f64 * PI / l;
                k * k
            })
            .collect();
        let norm = (2.0 / l).sqrt();
        let mut basis = Vec::with_capacity((domain.n_grid + 1) * n);
        for x in domain.grid_points() {
            for j in 1..=n {
                basis.push(norm * (j as f64 * PI * x / l).sin());
            }
        }
        // the sine vanishes at both walls; pin it so the projection is exact
        for j in 0..n {
            basis[j] = 0.0;
            basis[domain.n_grid * n + j] = 0.0;
        }
        Ok(Self {
            weights: domain.trapezoid_weights(),
            domain,
            damping,
            eigenvalues,
            basis,
        })
    }

    pub fn domain(&self) -> &DomainConfig {
        &self.domain
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn n_modes(&self) -> usize {
        self.domain.n_modes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `e^{−A t} v` (damping not included).
    pub fn semigroup_apply(&self, t: f64, v: &SpectralField) -> Result<SpectralField> {
        self.decay(t, v, 0.0)
    }

    /// `e^{−(A + d) t} v`.
    pub fn damped_semigroup_apply(&self, t: f64, v: &SpectralField) -> Result<SpectralField> {
        self.decay(t, v, self.damping)
    }

    fn decay(&self, t: f64, v: &SpectralField, shift: f64) -> Result<SpectralField> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!(
                "semigroup time must be non-negative, got {t}"
            )));
        }
        self.check_len(v)?;
        Ok(SpectralField::from_coeffs(
            v.coeffs()
                .iter()
                .zip(&self.eigenvalues)
                .map(|(c, lam)| (-(lam + shift) * t).exp() * c)
                .collect(),
        ))
    }

    /// ‖A^δ v‖ for δ in [0, 1/2).
    pub fn fractional_norm(&self, v: &SpectralField, delta: f64) -> Result<f64> {
        if !(0.0..0.5).contains(&delta) {
            return Err(Error::Domain(format!(
                "fractional exponent must lie in [0, 1/2), got {delta}"
            )));
        }
        self.check_len(v)?;
        Ok(v.coeffs()
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, lam)| lam.powf(2.0 * delta) * c * c)
            .sum::<f64>()
            .sqrt())
    }

    /// Values of `v` at the `n_grid + 1` grid points.
    pub fn to_grid(&self, v: &SpectralField) -> Vec<f64> {
        let n = self.n_modes();
        self.basis
            .chunks_exact(n)
            .map(|row| row.iter().zip(v.coeffs()).map(|(e, c)| e * c).sum())
            .collect()
    }

    /// Trapezoidal projection of grid values onto the retained modes.
    pub fn from_grid(&self, values: &[f64]) -> SpectralField {
        let n = self.n_modes();
        let mut coeffs = vec![0.0; n];
        for ((row, w), v) in self.basis.chunks_exact(n).zip(&self.weights).zip(values) {
            let wv = w * v;
            for (c, e) in coeffs.iter_mut().zip(row) {
                *c += wv * e;
            }
        }
        SpectralField::from_coeffs(coeffs)
    }

    /// `x ↦ ∫_Ω w(y) f(x − y) dy` from grid values of `w`, projected to coefficients.
    pub fn kernel_convolve(&self, w_grid: &[f64], kernel: &Kernel) -> SpectralField {
        self.from_grid(&kernel.convolve_grid(w_grid, &self.weights))
    }

    pub fn trapezoid_weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_len(&self, v: &SpectralField) -> Result<()> {
        if v.len() != self.n_modes() {
            return Err(Error::Shape(format!(
                "field has {} modes, operator has {}",
                v.len(),
                self.n_modes()
            )));
        }
        Ok(())
    }
}

/// A bounded kernel `f` on `(−L, L)`, tabulated at every grid offset `m h`.
#[derive(Debug, Clone)]
pub struct Kernel {
    bound: f64,
    n_grid: usize,
    // f(m h) for m = -n_grid ..= n_grid
    table: Vec<f64>,
}

impl Kernel {
    /// Tabulates `f` and checks `|f| <= bound` at every node.
    pub fn tabulate(domain: &DomainConfig, bound: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::Domain(format!(
                "kernel bound M_f must be non-negative, got {bound}"
            )));
        }
        let n = domain.n_grid as isize;
        let h = domain.spacing();
        let mut table = Vec::with_capacity(2 * domain.n_grid + 1);
        for m in -n..=n {
            let z = m as f64 * h;
            let v = f(z);
            if !v.is_finite() || v.abs() > bound * (1.0 + 1e-12) {
                return Err(Error::InvariantViolation(format!(
                    "|f({z})| = {} exceeds M_f = {bound}",
                    v.abs()
                )));
            }
            table.push(v);
        }
        Ok(Self {
            bound,
            n_grid: domain.n_grid,
            table,
        })
    }

    /// `f ≡ value`.
    pub fn constant(domain: &DomainConfig, value: f64) -> Result<Self> {
        Self::tabulate(domain, value.abs(), |_| value)
    }

    /// `f(z) = amplitude · exp(−z² / (2 width²))`.
    pub fn gaussian_bump(domain: &DomainConfig, amplitude: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Domain(format!(
                "gaussian kernel width must be positive, got {width}"
            )));
        }
        Self::tabulate(domain, amplitude.abs(), |z| {
            amplitude * (-z * z / (2.0 * width * width)).exp()
        })
    }

    /// M_f.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn values(&self) -> &[f64] {
        &self.table
    }

    /// Trapezoidal `Σ_k wt_k w_k f(x_i − y_k)` at every grid point `x_i`.
    pub fn convolve_grid(&self, w: &[f64], weights: &[f64]) -> Vec<f64> {
        let n = self.n_grid;
        assert_eq!(w.len(), n + 1, "grid length mismatch");
        let ww: Vec<f64> = w.iter().zip(weights).map(|(a, b)| a * b).collect();
        (0..=n)
            .map(|i| {
                // offset index of (i - k) is i - k + n
                let row = &self.table[i..=i + n];
                ww.iter().zip(row.iter().rev()).map(|(a, f)| a * f).sum()
            })
            .collect()
    }
}
