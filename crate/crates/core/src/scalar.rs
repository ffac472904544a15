//! The real scalar type everything numeric is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub use num_complex::Complex;

/// A floating-point field usable as the real part of matrix and algebra
/// coefficients. Implemented for `f32` and `f64`.
///
/// The tolerance hooks scale the library's numeric policies to the
/// precision of the type; the documented defaults are the `f64` values.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Threshold below which coefficients of algebra products are dropped.
    fn prune_threshold() -> Self;
    /// Bound on `‖U*U − I‖_op` accepted for a unitary.
    fn unitarity_tol() -> Self;
    /// Singular-value threshold for numerical rank decisions.
    fn rank_tol() -> Self;

    /// Lossless for every literal used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite real")
    }
}

impl Real for f64 {
    fn prune_threshold() -> Self {
        1e-15
    }
    fn unitarity_tol() -> Self {
        1e-10
    }
    fn rank_tol() -> Self {
        1e-8
    }
}

impl Real for f32 {
    fn prune_threshold() -> Self {
        1e-7
    }
    fn unitarity_tol() -> Self {
        1e-4
    }
    fn rank_tol() -> Self {
        1e-4
    }
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}
