//! Scalar abstraction for the classical numerics.
//!
//! Distributions, entropies, finite-length bounds and the Fourier inversion used
//! by the estimator are written against [`Real`], so they run in `f32` or `f64`.
//! The exact quantum oracle is `f64` only.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Tolerance used when accepting a probability vector as normalized.
    fn norm_tolerance() -> Self;

    /// Floor applied before raising tiny probabilities to powers.
    fn prob_floor() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Real for f64 {
    fn norm_tolerance() -> Self {
        1e-9
    }
    fn prob_floor() -> Self {
        1e-15
    }
}

impl Real for f32 {
    fn norm_tolerance() -> Self {
        1e-4
    }
    fn prob_floor() -> Self {
        1e-15
    }
}
