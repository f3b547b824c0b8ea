//! Scalar abstraction for the numeric parts of the library.
//!
//! Every model, metric, and dataset is generic over a floating-point
//! scalar so the same code runs in `f32` or `f64`. The crate root
//! exposes concrete aliases (`Dataset64`, `TrainedModel64`, ...) for
//! the common case.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Display
    + Debug
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` for constants and counts.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Scalar")
    }

    /// Count-to-scalar conversion (row counts, vote tallies).
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to any Scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
