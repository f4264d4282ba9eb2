//! Exact all-k-nearest-neighbor search on paired compressed cover trees.
//!
//! Points live in a [`metric::Metric`]; a [`covertree::CoverTree`] stores
//! each point once with an integer level. [`knn::knn_paired`] walks a query
//! tree and a reference tree together and returns the same distances as
//! [`knn::knn_bruteforce`]. [`analysis`] holds structural statistics, the
//! adversarial train-line datasets and the older recursion they defeat.
//!
//! Distances are generic over [`scalar::Scalar`] (`f32`, `f64` or exact
//! [`num_rational::BigRational`]); the aliases below cover the common cases.

pub mod analysis;
pub mod covertree;
pub mod error;
pub mod io;
pub mod knn;
pub mod metric;
pub mod scalar;
pub mod traversal;

pub use covertree::CoverTree;
pub use error::{CctError, Result};
pub use metric::{Level, Metric, PointId};
pub use scalar::Scalar;

/// Exact rational distances.
pub type ExactScalar = num_rational::BigRational;

pub type EuclideanF64 = metric::Euclidean<f64>;
pub type EuclideanF32 = metric::Euclidean<f32>;

/// Train-line graph metric with exact distances.
pub type TrainLineExact = metric::TrainLine<ExactScalar>;

pub type KnnResultF64 = knn::KnnResult<f64>;
