//! Central numeric tolerances.
//!
//! Every threshold that gates a behavioural decision lives here with a note
//! on why it has the value it has, so tuning happens in one place.

/// Residual above which a pinned phase is rejected as unable to cancel the
/// backward coupling. Exact cancellation is representable when feasible, so
/// anything above a few ulps of the coupling scale means "infeasible".
pub const PHASE_RESIDUAL: f64 = 1e-12;

/// Hermiticity defect allowed when accepting an externally supplied
/// second-moment matrix (relative to its largest entry).
pub const HERMITICITY: f64 = 1e-10;

/// How negative a second-moment diagonal may be before it is rejected rather
/// than treated as rounding noise.
pub const OCCUPATION_FLOOR: f64 = -1e-10;

/// Residual under which the closed-form preconditions (resonance and one-way
/// coupling) count as satisfied.
pub const CLOSED_FORM_CONDITIONS: f64 = 1e-10;

/// Relative gap in decay rates below which the two-rate kernel switches to
/// its analytic equal-rate limit.
pub const RATE_DEGENERACY: f64 = 1e-6;

/// Eigenvalue real part above which a drift matrix is declared unstable for
/// steady-state purposes; slightly negative so marginal cases fail loudly.
pub const STABILITY_MARGIN: f64 = -1e-12;

/// Relative discriminant size under which a 2x2 drift matrix counts as an
/// exceptional point (degenerate eigenvalues with a single eigenvector).
pub const EP_DISCRIMINANT: f64 = 1e-8;

/// Absolute residual target for the Newton search over exceptional-point
/// variables.
pub const EP_NEWTON: f64 = 1e-12;

/// Imaginary contamination allowed when a root of the exact quadratic solve
/// is accepted as a real-valued parameter.
pub const EP_REAL_ROOT: f64 = 1e-10;

/// Default relative tolerance for the adaptive integrator. Tight enough
/// that coherent-state factorization of the second moments survives a full
/// charging trajectory to well under 1e-8 (the defect tracks rtol roughly
/// 20:1 in occupation units).
pub const ODE_RTOL: f64 = 1e-10;

/// Default absolute tolerance for the adaptive integrator.
pub const ODE_ATOL: f64 = 1e-13;

/// Denominator floor when forming efficiency ratios near zero input energy.
pub const RATIO_FLOOR: f64 = 1e-30;

/// Default threshold for the timescale-separation checks: the lossy mode must
/// be this many times faster than everything it is eliminated against.
pub const ADIABATIC_MARGIN: f64 = 10.0;
