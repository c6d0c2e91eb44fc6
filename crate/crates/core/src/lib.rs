//! Open-category classification by adversarial sample generation.
//!
//! For every seen class a derivative-free optimizer searches for points that
//! sit just outside the class (generated negatives) and, optionally, points
//! the class cannot be told apart from (generated positives). A kernel SVM
//! trained per class on the real data against its generated negatives then
//! decides "seen" versus "novel" at prediction time.

pub mod baselines;
pub mod dataset;
pub mod dfo;
pub mod error;
pub mod eval;
pub mod generation;
pub mod open_classifier;
pub mod svm;

pub use error::{AsgError, Result};
