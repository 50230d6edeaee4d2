//! Scalar abstraction for the deterministic numeric kernel.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar usable by the special functions, quadrature, root
/// finding and the selective normal model.
///
/// Implemented for `f32` and `f64`. Tolerances inside the kernel are floored
/// at a small multiple of `epsilon()`, so `f32` works but with correspondingly
/// looser accuracy.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }

    /// Tolerance floor: `max(tol, 64 eps)`.
    #[inline]
    fn tol_floor(tol: Self) -> Self {
        tol.max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Real for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}
