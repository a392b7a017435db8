//! Scalar abstraction the whole crate is generic over.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::{AddAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar type (`f32` or `f64`).
///
/// All geometry, field evaluation and solver code is written against this
/// trait; pick the precision at the call site or use the `F64` aliases from
/// the crate root.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Pull an `f64` constant into the scalar type.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// Widen to `f64` for diagnostics and error reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + Debug
        + Display
        + LowerExp
        + Default
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lit_roundtrips_for_both_precisions() {
        assert_eq!(f64::lit(0.25), 0.25);
        assert_eq!(f32::lit(0.25), 0.25f32);
    }

    #[test]
    fn as_f64_widens() {
        assert_eq!(1.5f32.as_f64(), 1.5);
    }
}
