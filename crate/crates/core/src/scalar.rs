use std::fmt::Debug;
use std::ops::Neg;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Coordinate type for group elements and paths.
///
/// Only field operations are required; anything needing square roots (norms,
/// distances, rescaling) is gated on [`num_traits::Float`] instead.
pub trait Scalar:
    Num + Copy + Neg<Output = Self> + PartialOrd + ToPrimitive + FromPrimitive + Debug + Send + Sync + 'static
{
    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half(self) -> Self {
        self / Self::two()
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Ratio<i64> {}
impl Scalar for Ratio<i128> {}

pub(crate) fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
