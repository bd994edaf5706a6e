//! Scalar abstraction: all numeric kernels are generic over `f32`/`f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate.
///
/// `f64` is the reference type: every documented tolerance (mass checks,
/// polytope row sums, inequality slacks) is stated for it. `f32` works with
/// proportionally looser construction tolerances via [`Scalar::mass_tol`]
/// and [`Scalar::clamp_tol`].
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Display
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Tolerance for "total mass equals 1" checks at construction.
    fn mass_tol() -> Self;

    /// Entries in `[-clamp_tol, 0)` are clamped to zero; anything more
    /// negative is rejected.
    fn clamp_tol() -> Self;
}

impl Scalar for f64 {
    fn mass_tol() -> Self {
        1e-9
    }
    fn clamp_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn mass_tol() -> Self {
        1e-4
    }
    fn clamp_tol() -> Self {
        1e-6
    }
}

/// Cast an `f64` constant into the working scalar.
pub fn real<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("constant representable in scalar type")
}

/// Lossy view of a scalar as `f64`, for reports and serialization.
pub fn as_f64<F: Scalar>(x: F) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
