//! Cross-release defect-model validation experiments.
//!
//! The crate loads multi-release software metric datasets, trains a roster of
//! classifiers, estimates their AUC with walk-forward, repeated k-fold and
//! out-of-sample bootstrap validation, and measures how well each estimate
//! predicts accuracy on the next, unseen release.
//!
//! Feature values, models and scores are generic over [`Scalar`] (`f32` or
//! `f64`); metrics and statistics are computed in `f64`.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod metaval;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod validation;

mod linalg;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Dataset = dataset::ProjectDataset<f64>;
pub type Dataset32 = dataset::ProjectDataset<f32>;
pub type Release = dataset::ReleaseTable<f64>;
pub type Matrix = classifiers::LabeledMatrix<f64>;
pub type Model = classifiers::TrainedModel<f64>;
