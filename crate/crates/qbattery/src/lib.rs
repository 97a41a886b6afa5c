//! Simulation and analysis of a nonreciprocal quantum battery.
//!
//! The device is a pair of bosonic modes: a driven charger `a` feeding a
//! battery `b`, coupled both directly (strength `J`, phase `±φ`) and through
//! a strongly damped auxiliary cavity `c`. Eliminating the fast cavity leaves
//! an effective two-mode system in which the direct and mediated paths
//! interfere. At the right phase the interference is fully destructive for
//! the backward path only: energy flows charger → battery while the battery
//! stays isolated from charger noise and cannot discharge back.
//!
//! What the crate provides:
//!
//! * [`model`]: three-mode parameters, the reduction to the effective
//!   two-mode model, and solvers for the one-way (nonreciprocal) condition.
//! * [`dynamics`]: first and second moments of the Gaussian state, their
//!   drift equations, adaptive and fixed-step integration, and observables
//!   (energies, efficiency, charging power).
//! * [`analytic`]: closed-form charging curves and steady states on the
//!   resonant one-way line, valid uniformly through the equal-rate limit.
//! * [`spectrum`]: eigenstructure of the effective drift matrix and searches
//!   for exceptional points where its eigenvectors coalesce.
//! * [`experiments`]: parameter sweeps and the predefined figure datasets.
//! * [`validate`]: the acceptance checks shipped with the crate.
//!
//! The numeric core is generic over the scalar type via [`scalar::Real`];
//! the `*64` aliases below fix `f64` for everyday use.

// Validation code writes `!(x < y)` instead of `x >= y` on purpose: the
// negated form also rejects NaN, which must never slip through a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod csvio;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod scalar;
pub mod spectrum;
pub mod tol;
pub mod validate;

pub use error::{Error, Result};
pub use scalar::Real;

/// Three-mode system parameters over `f64`.
pub type SystemParams64 = model::SystemParams<f64>;
/// Reduced two-mode parameters over `f64`.
pub type EffectiveParams64 = model::EffectiveParams<f64>;
/// First plus second moments over `f64`.
pub type MomentState64 = dynamics::MomentState<f64>;
/// Sampled moment trajectory over `f64`.
pub type Trajectory64 = dynamics::Trajectory<f64>;
/// Effective drift matrix over `f64`.
pub type DriftMatrix64 = spectrum::DriftMatrix<f64>;
