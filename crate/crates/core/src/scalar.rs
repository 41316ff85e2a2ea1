//! Scalar abstraction shared by every geometric and planning routine.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the crate is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    fn lit(v: f64) -> Self;

    /// Lossless widening to `f64`, used for hashing and logging.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Tolerance used when checking that a quaternion or direction is unit length.
///
/// `1e-6` for `f64`; single precision cannot hold that after a few products, so
/// it gets a few ulps of slack.
pub fn unit_tolerance<S: Real>() -> S {
    S::lit(1e-6).max(S::epsilon() * S::lit(16.0))
}

/// Tolerance below which two ray/gaze metrics are treated as tied.
pub fn tie_tolerance<S: Real>() -> S {
    S::lit(1e-9).max(S::epsilon() * S::lit(64.0))
}
