//! Experiment orchestration, configuration, CSV I/O and seed derivation.

pub mod commands;
pub mod config;
pub mod experiment;
pub mod io;
pub mod seed;

pub use config::{ExperimentConfig, KvConfig};
pub use experiment::{fit_rate_slope, run_rate_experiment, RateRow, RateSlope, RateTable};
pub use seed::{cell_index, derive_seed};
