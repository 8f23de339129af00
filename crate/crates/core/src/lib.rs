//! Smoothing and batched evaluation of particle trajectories.
//!
//! Raw particle paths (sets of 3D points traced by a flow solver) are split
//! into groups of four points. Each group gets a cubic Bezier curve and three
//! cubic spline segments built through a constant 4x5 construction matrix;
//! segment and Bezier are blended into one cubic per segment. All cubics are
//! then sampled on a uniform tick grid through a cached power matrix, so that
//! evaluation becomes one dense product per batch of coefficient rows.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: points, trajectories and validation.
//! - [`bezier`]: control polygon to power basis.
//! - [`builder`]: construction matrix, seeding, blending, grouping.
//! - [`sparse`]: the block-diagonal global matrix and its products.
//! - [`evaluator`]: power matrix cache, batched evaluation, stitching.
//! - [`parallel`]: partitioning, fork-join execution, scaling benchmarks.
//! - [`io`]: dataset, sample and report files.
//!
//! With the default `parallel` feature, work is spread over a rayon pool;
//! without it every chunk runs on the calling thread.

pub mod bezier;
pub mod builder;
mod error;
pub mod evaluator;
pub mod io;
pub mod model;
mod ops;
pub mod parallel;
pub mod sparse;

pub use error::{Error, Result};
pub use model::{CubicCoeffs, Point3, SegmentSpec, Trajectory, TrajectorySet};
pub use ops::OpCounter;
