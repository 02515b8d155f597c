use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point type the mechanism math is written against.
///
/// The step sizes and tolerances scale with the precision of the type, so
/// `f32` runs of the same code use coarser finite differences.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Central-difference step for kinematic Jacobians (rad).
    fn jacobian_step() -> Self;
    /// Central-difference step for the spring sensitivities (rad).
    fn sensitivity_step() -> Self;
    /// Absolute tolerance for geometric constructions (mm or rad).
    fn geom_tol() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Lossy conversion for reports and error messages.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn jacobian_step() -> Self {
        1e-6
    }
    fn sensitivity_step() -> Self {
        1e-5
    }
    fn geom_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn jacobian_step() -> Self {
        5e-3
    }
    fn sensitivity_step() -> Self {
        5e-3
    }
    fn geom_tol() -> Self {
        1e-4
    }
}

/// Degrees to radians.
#[inline]
pub fn deg<T: Scalar>(v: T) -> T {
    v.to_radians()
}
