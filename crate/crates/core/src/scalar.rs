//! Scalar abstraction: all numeric kernels are generic over the float width.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the toolkit computes with (`f32` or `f64` in practice).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lift an `f64` constant into the scalar type.
    ///
    /// Panics if the value is not representable at all (never the case for
    /// finite constants and `f32`/`f64`).
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant must convert into the scalar type")
    }

    /// Lift a count into the scalar type.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize must convert into the scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifts_constants_for_both_widths() {
        assert_eq!(f64::of(1.5), 1.5f64);
        assert_eq!(f32::of(1.5), 1.5f32);
        assert_eq!(f64::of_usize(42), 42.0);
    }
}
