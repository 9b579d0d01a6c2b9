//! Pool-based active learning for binary text classification, with the
//! stabilizing-predictions, declining-confidence and non-increasing-confidence
//! stopping methods evaluated over fixed, batch and unlabeled-pool stop sets.
//!
//! The numeric core ([`SparseVector`], [`svm::Model`], the stopping monitors and
//! the metrics) is generic over a [`Scalar`] float type. The experiment harness
//! and the CLI work in `f64`; the aliases below name the concrete types.

pub mod corpus;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod scalar;
pub mod sparse;
pub mod stopping;
pub mod svm;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use sparse::SparseVector;
pub use svm::Label;

pub type SparseVector64 = sparse::SparseVector<f64>;
pub type SparseVector32 = sparse::SparseVector<f32>;

pub type Model64 = svm::Model<f64>;
pub type Model32 = svm::Model<f32>;

pub type BinaryTask64 = corpus::BinaryTask<f64>;
pub type BinaryTask32 = corpus::BinaryTask<f32>;

pub type MetricsReport64 = evaluation::MetricsReport<f64>;
pub type RunRecord64 = engine::RunRecord<f64>;
pub type Monitor64 = stopping::Monitor<f64>;
