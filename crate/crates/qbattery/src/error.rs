//! Error type shared by the whole crate.
//!
//! Diagnostics carry `f64` payloads regardless of the scalar the computation
//! ran in; callers widen via [`crate::scalar::Real::as_f64`] at the error site.

use thiserror::Error;

/// Everything that can go wrong across configuration, solving, and sweeps.
#[derive(Debug, Error)]
pub enum Error {
    /// A config line failed to parse.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    /// A config key is not recognized by the target schema.
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    /// A parameter value is outside its admissible range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParam { name: &'static str, message: String },

    /// Preset name not in the built-in table.
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    /// No real coupling J can realize one-way isolation at the requested phase.
    #[error("requested phase cannot cancel the backward coupling (residual {residual:.3e})")]
    IncompatiblePhase { residual: f64 },

    /// A rate that must be strictly positive is not.
    #[error("rate {name} must be positive, got {value}")]
    NonpositiveRate { name: &'static str, value: f64 },

    /// Closed-form expressions were requested outside their regime of validity.
    #[error("closed form requires a resonant one-way system: {0}")]
    ConditionsNotMet(ConditionResiduals),

    /// State vector length does not match the model dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Adaptive stepper drove the step below the representable floor.
    #[error("step size underflow at t = {t_reached}")]
    StepSizeUnderflow { t_reached: f64 },

    /// Steady state requested for a drift matrix with a non-decaying mode.
    #[error("system is not asymptotically stable (max Re eigenvalue {max_re:.3e})")]
    UnstableSystem { max_re: f64 },

    /// Root finding over the requested variable has no real-valued solution.
    #[error("no real solution for the requested exceptional-point variable")]
    NoRealSolution,

    /// Iterative solve stalled above tolerance.
    #[error("iteration failed to converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },

    /// Sweep specification is structurally invalid.
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    /// Filesystem or stream failure while writing outputs.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How far each closed-form precondition is from holding, all in the model's units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionResiduals {
    /// |Δ'_a| (charger must be on effective resonance).
    pub detuning_a: f64,
    /// |Δ'_b| (battery must be on effective resonance).
    pub detuning_b: f64,
    /// |J₋ − iΓ/2·e^{-iφ}|, distance from exact backward-coupling cancellation.
    pub backward_coupling: f64,
}

impl std::fmt::Display for ConditionResiduals {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "|detuning_a| = {:.3e}, |detuning_b| = {:.3e}, |backward coupling| = {:.3e}",
            self.detuning_a, self.detuning_b, self.backward_coupling
        )
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
