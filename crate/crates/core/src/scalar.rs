//! Scalar abstraction shared by every numerical module.
//!
//! All math is written against [`Real`], which `f32` and `f64` implement.
//! Constants are taken from `f64` and narrowed with [`Real::lit`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Machine epsilon scaled for "converged" checks in iterative kernels.
    fn tiny() -> Self {
        Self::epsilon() * Self::lit(0.5)
    }

    /// Narrow an `f64` literal to this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

impl Real for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

/// √(2π), the GKP qunaught lattice spacing.
#[inline]
pub fn gkp_period<T: Real>() -> T {
    (T::TAU()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_matches_reference_points() {
        assert!((Real::erfc(0.0_f64) - 1.0).abs() < 1e-15);
        assert!((Real::erfc(1.0_f64) - 0.157_299_207_050_285_13).abs() < 1e-15);
        assert!((Real::erfc(1.0_f32) - 0.157_299_2).abs() < 1e-6);
        assert_eq!(Real::erfc(50.0_f64), 0.0);
    }

    #[test]
    fn period_is_sqrt_two_pi() {
        assert!((gkp_period::<f64>() - 2.506_628_274_631_000_5).abs() < 1e-15);
    }
}
