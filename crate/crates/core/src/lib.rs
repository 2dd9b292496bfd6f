//! Automatic binary image segmentation by spectral relaxation of an
//! uninformed MRF energy.
//!
//! The color models of both regions are re-estimated from the labeling
//! itself, so minimizing the energy needs no seeds. A quadratic surrogate of
//! the histogram energy turns the problem into a minimum cut on a complete
//! graph with negative weights; relaxing the ±1 indicator gives the largest
//! eigenvector of the weight matrix, computed here by Lanczos iteration with
//! an `O(n)` structured matrix-vector product.
//!
//! Two weight oracles are provided: [`oracle::SmallOracle`] for a handful of
//! gray levels and [`oracle::LargeOracle`] for clustered RGB colors with a
//! Gaussian kernel color model. [`hardness`] carries the set-partition
//! reduction used to check the exact energy.

pub mod bench;
pub mod eigen;
pub mod energy;
pub mod error;
pub mod hardness;
pub mod image;
pub mod kmeans;
pub mod oracle;
pub mod segment;
pub mod smoothness;
pub mod synthetic;

pub use error::{Error, Result};
pub use image::{IndexedImage, Label, Labeling, RawImage};
pub use segment::{segment, OracleKind, SegmentParams, SegmentationResult};
pub use smoothness::{SmoothnessGraph, SmoothnessParams};
