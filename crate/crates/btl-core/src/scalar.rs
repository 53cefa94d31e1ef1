//! Scalar abstraction for all coordinate and reward arithmetic.
//!
//! Every numeric routine in this crate is generic over [`Scalar`], so the
//! same code runs on `f32` and `f64`. Public types default to `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Serialize + DeserializeOwned + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used when ingesting parsed text or JSON numbers.
    fn from_f64_lossy(v: f64) -> Self {
        <Self as NumCast>::from(v).unwrap_or_else(Self::nan)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + NumCast
        + Debug
        + Display
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}
