//! Quadratic prediction error estimation for time-varying predictor models
//! driven by dependent data, with an ARMA specialization, the quantities
//! behind its finite-sample rate analysis, and a Monte Carlo harness.

// Guards of the form `!(x > 0.0)` deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arma;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod model;
pub mod noise;
pub mod param_space;
pub mod theory;

pub use error::{Error, Result};
pub use model::PredictorModel;
