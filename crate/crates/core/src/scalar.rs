//! Scalar abstraction shared by every numeric module.
//!
//! Weights, fields, characteristic values and the capacity equations are all
//! generic over [`Scalar`], which is implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar always converts to f64")
    }

    /// Complementary error function, evaluated in double precision.
    #[inline]
    fn erfc(self) -> Self {
        Self::of(crate::capacity::erfc::erfc_f64(self.as_f64()))
    }

    /// Logistic sigmoid `1 / (1 + e^{-x})`.
    #[inline]
    fn sigmoid(self) -> Self {
        Self::one() / (Self::one() + (-self).exp())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Heaviside step with `H(0) = 1`.
#[inline]
pub fn heaviside<T: Scalar>(x: T) -> bool {
    x >= T::zero()
}
