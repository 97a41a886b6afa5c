//! Scalar abstraction for the numeric core.
//!
//! Everything downstream is generic over [`Real`], which bundles the traits
//! the solvers and closed forms actually need. In practice this means `f32`
//! and `f64`; the crate root exports `f64` aliases for the common case.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar usable throughout the crate.
///
/// The bound set is the union of what the ODE stepper (assign ops, comparisons),
/// the closed forms (transcendentals, `PI`), and diagnostics (formatting) need.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Convert an `f64` literal into this scalar type.
    ///
    /// Panics only if the conversion is unrepresentable, which cannot happen
    /// for finite literals and the float types this crate supports.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal must convert")
    }

    /// Widen to `f64` for error reporting and serialization.
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn as_f64(self) -> f64 {
        self
    }
}
