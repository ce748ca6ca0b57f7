//! Coresets for ordered weighted clustering in `R^d`.
//!
//! The crate covers the p-Centrum objective (sum of the `p` largest
//! point-to-center distances) and Ordered k-Median (rank-weighted sum of
//! distances), with constructions for single-`p` coresets and for
//! simultaneous coresets that preserve every non-increasing weight vector.

pub mod centers;
pub mod coreset1d;
pub mod coreset_nd;
pub mod error;
pub mod objective;
pub mod projection;
pub mod splitting;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use types::{Dataset, IntervalStats, Point, WeightVector, WeightedCoreset, WeightedPoints};
