//! Scalar abstraction for the numerical core.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the solvers and analytics are generic over.
///
/// Implemented for `f32` and `f64`; everything downstream of config parsing
/// works with either precision.
pub trait Real:
    RealField
    + FromPrimitive
    + ToPrimitive
    + Copy
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` literals (gains, tolerances).
    fn from_config(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 converts to any Real scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
