//! Continuum random cluster model toolkit.
//!
//! Germ-grain configurations, exact and Markov chain samplers for the
//! continuum random cluster model and the Widom–Rowlinson model, and the
//! statistical checks used to validate them. Everything is generic over the
//! coordinate scalar; the aliases below fix it to `f64` or `f32`.

pub mod analysis;
pub mod connectivity;
pub mod error;
pub mod geometry;
pub mod io;
pub mod params;
pub mod radius;
pub mod rng;
pub mod samplers;
pub mod scalar;
pub mod spatial;

pub use error::{Error, Result};
pub use geometry::{overlap, BoundaryCondition, Configuration, Coords, MarkedPoint, Topology, Window};
pub use params::{ModelParams, Regime};
pub use radius::{InverseCdfTable, RadiusLaw};
pub use rng::{ChainRng, SeedStream};
pub use scalar::Scalar;

pub type MarkedPointF64 = MarkedPoint<f64>;
pub type WindowF64 = Window<f64>;
pub type ConfigurationF64 = Configuration<f64>;
pub type BoundaryConditionF64 = BoundaryCondition<f64>;
pub type ModelParamsF64 = ModelParams<f64>;

pub type MarkedPointF32 = MarkedPoint<f32>;
pub type WindowF32 = Window<f32>;
pub type ConfigurationF32 = Configuration<f32>;
pub type BoundaryConditionF32 = BoundaryCondition<f32>;
pub type ModelParamsF32 = ModelParams<f32>;
