//! Theoretical quantities: offsets, information matrices, assumption
//! constants, dependency matrices and burn-in times.

pub mod assumptions;
pub mod burn_in;
pub mod dependency;
pub mod information;
mod linalg;
pub mod offsets;

pub use assumptions::{
    gradient_bound_mc, quad_ident_constant_mc, smoothness_constants_mc, IdentifiabilityEstimate,
    SmoothnessEstimate,
};
pub use burn_in::{
    burn_in_times, parameter_error_bound, prediction_error_envelope, theorem1_bound, BurnInReport,
    ConstantSet, DEFAULT_RATE_CONSTANT,
};
pub use dependency::{dependency_matrix_markov, fit_dependency_growth, DependencyGrowth, DependencyMatrix};
pub use information::{
    empirical_info, expected_info_mc, fisher_info, information_trajectory, isometry_event_rates,
    isometry_violation_rates, ExpectedInfo, IsometryConstants, IsometryRates, PSD_TOLERANCE,
};
pub use linalg::{min_eigenvalue, symmetric_spectral_norm};
pub use offsets::{
    linear_gap, linearized_offset, martingale_offset, mean_square_gap, prediction_gap,
    taylor_decomposition_check, TaylorCheck,
};
