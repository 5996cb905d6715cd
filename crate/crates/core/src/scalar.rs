//! Scalar abstraction shared by every closed-form routine.
//!
//! The model only needs real trigonometry and a handful of constants, so any
//! `num_traits::Float` with `FloatConst` qualifies. `f64` is what the search,
//! simulator and CLI use; `f32` works for the closed forms at reduced accuracy.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `x * x`
#[inline]
pub(crate) fn sq<T: Real>(x: T) -> T {
    x * x
}
