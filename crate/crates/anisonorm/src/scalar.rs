//! Floating-point scalar abstraction.
//!
//! All analysis routines are generic over [`Scalar`], which is any real
//! field with lossless conversion to `f64` for reporting. In practice this
//! means `f32` or `f64`; the tolerances quoted throughout the crate assume
//! `f64`.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Real scalar type used by all system and analysis computations.
pub trait Scalar: RealField + ToPrimitive + Copy {
    /// Conversion from an `f64` constant or tolerance.
    fn from_f64_approx(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Conversion to `f64` for reports and diagnostics.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
