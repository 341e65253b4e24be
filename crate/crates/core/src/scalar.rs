//! Floating-point bound shared by the numeric parts of the crate.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

/// Floating point scalar: `f32` or `f64`.
///
/// Dominance and front sorting only need `PartialOrd` and accept exact
/// types such as rationals; anything that takes square roots or logarithms
/// (the utopia distance, say, or PUCB) is bounded by this trait.
pub trait Scalar: Float + FromPrimitive + Debug + Send + Sync + 'static {
    /// Lossy conversion from `f64`, used for literal constants.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("scalar literal out of range")
    }

    /// Conversion from a count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count out of range")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
