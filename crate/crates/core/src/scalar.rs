//! Scalar abstraction for coordinates and radii.
//!
//! Geometry, spatial indexing, connectivity and the samplers are written
//! against [`Scalar`] so the same code runs on `f32` and `f64` coordinates.
//! Probabilities, intensities and statistics are always carried in `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; every value a sampler produces is representable.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is convertible to every Scalar")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("Scalar is convertible to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}
