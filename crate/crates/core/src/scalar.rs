//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point scalar used for polynomial coefficients and vectors.
///
/// The tolerance hooks let the same algorithms run in single precision with
/// thresholds that make sense for the type.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance for `BᵀB = I` checks on frames and orthogonal matrices.
    fn ortho_tol() -> Self;

    /// Relative threshold below which expanded coefficients are treated as dust.
    fn prune_rel() -> Self;

    /// Rank threshold used when extracting a basis from a set of directions.
    fn rank_tol() -> Self;

    /// Lossy conversion from `f64`, used for literals and RNG draws.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn ortho_tol() -> Self {
        1e-10
    }
    fn prune_rel() -> Self {
        1e-14
    }
    fn rank_tol() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn ortho_tol() -> Self {
        1e-4
    }
    fn prune_rel() -> Self {
        1e-6
    }
    fn rank_tol() -> Self {
        1e-4
    }
}
