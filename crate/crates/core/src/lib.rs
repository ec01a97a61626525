//! Topological feature extraction for point clouds.
//!
//! The pipeline: sample or load a point cloud, build its Vietoris-Rips
//! filtration, compute persistent homology over Z/2, summarize diagrams as
//! death vectors and persistence landscapes, vectorize those on a fixed
//! grid, and feed the vectors to permutation tests or a linear classifier.

pub mod classify;
pub mod cli;
pub mod complex;
pub mod error;
pub mod persistence;
pub mod pointcloud;
pub mod stats;
pub mod summaries;
pub mod util;

pub use error::{Error, Result};
