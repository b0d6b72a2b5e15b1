//! Scalar abstraction so the analysis can run in `f32` or `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used for probabilities, rates and times.
///
/// Implemented for `f32` and `f64`. All closed-form analysis and the
/// simulator are generic over this trait; the crate root exports `f64`
/// aliases, which are what the CLI and the test suite use.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Absolute tolerance for "probabilities sum to one" style checks.
    ///
    /// Validation sums are Kahan-compensated, so the `f64` tolerance can sit
    /// at 1e-12 regardless of support size; `f32` gets a proportionally
    /// looser value.
    fn prob_tol() -> Self;
}

impl Real for f32 {
    fn prob_tol() -> f32 {
        1e-5
    }
}

impl Real for f64 {
    fn prob_tol() -> f64 {
        1e-12
    }
}

/// Shorthand for converting an `f64` constant into the working scalar.
pub(crate) fn cast<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 constant representable in scalar type")
}
