//! Scalar abstraction shared by the precision-agnostic kernels.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed};

/// Real floating-point scalar: `f32` or `f64`.
///
/// The target function, Chebyshev machinery and QSP evaluator are written
/// against this trait; the optimizer, fitting and file formats work in `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Signed
    + rustfft::FftNum
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64` (rounds for `f32`).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to every Real")
    }

    /// Conversion from an index or count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to every Real")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
