//! s-step (synchronization-avoiding) coordinate descent for Lasso and
//! linear SVM, with a deterministic multi-worker engine that counts
//! communication.

pub mod bench;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod lasso;
pub mod matrix;
pub mod record;
pub mod sampling;
pub mod svm;

pub use error::{Error, Result};
