//! Probes that measure the estimates on `F`, the solution map and the long-time
//! behaviour against their closed-form bounds.
//!
//! Every bound column is computed from closed-form constants, never fitted.
//! A probe that violates a bound returns a failing [`ProbeReport`], not an error.

mod continuity;
mod dynamics;
mod report;

pub use continuity::{
    demo_remark1, perturbation_sequence, probe_fc_continuity, probe_fd_continuity,
    probe_ignoring, probe_lipschitz,
};
pub use dynamics::{convergence_study, probe_dissipativity, probe_gronwall};
pub use report::{ProbeReport, ProbeRow};

use rand::Rng;

use crate::error::Result;
use crate::history::HistorySegment;
use crate::spatial::SpectralField;

/// Names accepted by probe selectors.
pub const PROBE_NAMES: [&str; 8] = [
    "ignoring",
    "lipschitz",
    "fc-continuity",
    "fd-continuity",
    "remark1",
    "gronwall",
    "dissipativity",
    "convergence",
];

/// Probes whose pass flag demonstrates rather than asserts.
pub const DEMONSTRATIONS: [&str; 1] = ["remark1"];

/// Default relative slack on every bound.
pub const DEFAULT_SLACK: f64 = 0.1;

/// A segment with independent frames whose `j`-th coefficient is uniform in
/// `[−scale/j, scale/j]`.
pub fn random_segment(
    rng: &mut impl Rng,
    r: f64,
    n_steps: usize,
    n_modes: usize,
    scale: f64,
) -> Result<HistorySegment> {
    let frames = (0..n_steps)
        .map(|_| {
            SpectralField::from_coeffs(
                (1..=n_modes)
                    .map(|j| scale * rng.gen_range(-1.0..1.0) / j as f64)
                    .collect(),
            )
        })
        .collect();
    HistorySegment::new(r, frames)
}

/// A segment that varies smoothly in `θ`, with random phases per mode.
pub fn random_smooth_segment(
    rng: &mut impl Rng,
    r: f64,
    n_steps: usize,
    n_modes: usize,
    scale: f64,
) -> Result<HistorySegment> {
    let params: Vec<(f64, f64, f64)> = (1..=n_modes)
        .map(|j| {
            (
                scale * rng.gen_range(-1.0..1.0) / (j * j) as f64,
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    HistorySegment::from_fn(r, n_steps, |t| {
        SpectralField::from_coeffs(
            params
                .iter()
                .map(|(a, w, p)| a * (1.0 + 0.5 * (w * t + p).sin()))
                .collect(),
        )
    })
}
