//! Fiber bodies of convex bodies represented by support functions.

pub mod bodies;
pub mod curved;
pub mod error;
pub mod fiber;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod puffed;
pub mod quadrature;
pub mod slicer;
pub mod verify;
pub mod zonoids;

pub use bodies::{BodySpec, ProjectionSplit, SampleMeta, SampledSupport, SphereSampling};
pub use error::{FiberError, Result};
