//! Two-sample test for equality of high-dimensional covariance matrices.
//!
//! The test compares `Σ1` and `Σ2` through the induced samples `y ⊗ y`, whose
//! means are `vec(Σ_i)`. Every quantity is computed from the Gram matrices of
//! the original observations, so nothing of size `p²` is ever formed. The
//! null distribution of the U-statistic is approximated by a three-cumulant
//! matched chi-square law.
//!
//! ```
//! use hdcov::{covariance_test, SampleBlock, TestOptions};
//!
//! let x = SampleBlock::from_rows(&[[1.0, 0.2], [0.3, -1.1], [-0.4, 0.9], [0.8, 0.1], [-1.2, -0.3]]).unwrap();
//! let y = SampleBlock::from_rows(&[[2.0, 0.5], [-1.7, 1.4], [0.6, -2.2], [1.1, 0.9], [-0.9, -1.6]]).unwrap();
//! let report = covariance_test(&x, &y, &TestOptions::default()).unwrap();
//! assert!((0.0..=1.0).contains(&report.p_value));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod gram;
pub mod linalg;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod sim;
pub mod special;
pub mod statistic;
pub mod traces;

pub use error::{Error, Result};
pub use exec::Execution;
pub use matching::{critical_value, match_params, p_value, p_value_normalized, ApproxParams, Calibration};
pub use model::{Method, SampleBlock, TestReport};
pub use pipeline::{covariance_test, report_from_gram, TestOptions};
