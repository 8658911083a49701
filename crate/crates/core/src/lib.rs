//! Permutation patterns at every scale: exact and sampled densities inside
//! bounded windows, permuton sampling, and constructions that realize
//! prescribed limits at several scales at once.

pub mod construct;
pub mod count;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod numeric;
pub mod pattern;
pub mod perm;
pub mod permuton;
pub mod scaling;
pub mod seed;
pub mod sequence;

pub use error::{Error, Result};
pub use estimate::{DensityEstimate, DensityVector};
pub use perm::{IndexSubset, Permutation};
pub use permuton::Permuton;
pub use scaling::ScalingFunction;
pub use seed::SeedStream;
