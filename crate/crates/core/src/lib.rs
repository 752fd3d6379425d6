//! Mild solutions of parabolic equations on (0, L) whose nonlinearity is a
//! nonlocal delay term written as a Stieltjes integral over the solution's own
//! history, with a state-dependent generating function made of discrete,
//! absolutely continuous and Cantor-type singular parts.
//!
//! The crate is organised bottom-up:
//!
//! - [`spatial`]: sine-series fields, the Dirichlet Laplacian and its semigroup,
//!   fractional norms, kernel convolution.
//! - [`history`]: history segments on a uniform time grid over `[-r, 0]`.
//! - [`measure`]: the generating function, its variation and Stieltjes quadrature.
//! - [`delay_term`]: the birth function and the delay nonlinearity `F = F_c + F_d`.
//! - [`solver`]: exponential Euler with a per-step fixed point.
//! - [`verify`]: probes that measure every estimate against its closed-form bound.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod delay_term;
pub mod error;
pub mod history;
pub mod measure;
pub mod solver;
pub mod spatial;
pub mod verify;

pub use delay_term::{BirthFunction, BirthMode, DelayTerm};
pub use error::{Error, Result};
pub use history::HistorySegment;
pub use measure::GeneratingMeasure;
pub use solver::{Solver, SolverConfig, TrajectoryRecord};
pub use spatial::{DomainConfig, Kernel, SpatialOperator, SpectralField};
