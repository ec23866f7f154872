//! Dyadic and four-adic lattices on `[0, 1)`.
//!
//! Step functions are dense vectors of values on the cells of a fixed depth.
//! Intervals are `(depth, index)` pairs; no floating endpoints are stored.
//! The Haar function of `I` is `+1/sqrt|I|` on the right half and
//! `-1/sqrt|I|` on the left half.

mod error;
mod fouradic;
mod haar;
mod interval;
mod level;
mod step;
mod transform;

pub use error::DyadicError;
pub use fouradic::{FourAdicInterval, FourAdicMartingale, MartingaleKind};
pub use haar::{haar_decompose, HaarSystem};
pub use interval::DyadicInterval;
pub use level::{weighted_level_set_measure, weighted_level_set_measure_with, LevelSet};
pub use step::DyadicStepFunction;
pub use transform::{martingale_transform, TransformSpec};

pub type Result<T> = std::result::Result<T, DyadicError>;
