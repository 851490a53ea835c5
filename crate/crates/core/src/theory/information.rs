//! Gradient Gram matrices, Fisher information and the isometry events
//! `Σ̂_T ⪯ 8 Σ̄` (upper) and `Σ̂_T ⪰ Σ̄/16` (lower).

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::harness::seed::derive_seed;
use crate::model::PredictorModel;
use crate::noise::{sample_noise, NoiseSpec};

use super::linalg::min_eigenvalue;

/// Eigenvalue threshold below which a matrix counts as not PSD.
pub const PSD_TOLERANCE: f64 = 1e-10;

const INFO_STREAM: &[u8] = b"information";

/// `Σ̂_T = (1/T) Σ Z_t Z_tᵀ` with `Z_t = ∇_θ f_t(X_t, θ⋆)`.
pub fn empirical_info(model: &dyn PredictorModel, theta_star: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    check_len(model.dim(), theta_star.len())?;
    if y.is_empty() {
        return Err(Error::domain("empirical information of an empty trajectory"));
    }
    let z = model.gradients(theta_star, y)?;
    Ok(z.tr_mul(&z) / y.len() as f64)
}

/// Trajectory `r` of the information stream rooted at `seed`.
pub fn information_trajectory(
    model: &dyn PredictorModel,
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    seed: u64,
    replicate: usize,
) -> Result<Vec<f64>> {
    let w = sample_noise(noise, horizon, derive_seed(seed, INFO_STREAM, replicate as u64));
    model.generate(theta_star, &w)
}

fn info_samples(
    model: &dyn PredictorModel,
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<DMatrix<f64>>> {
    noise.validate()?;
    if horizon == 0 {
        return Err(Error::domain("horizon must be positive"));
    }
    (0..n_mc)
        .into_par_iter()
        .map(|r| {
            let y = information_trajectory(model, theta_star, noise, horizon, seed, r)?;
            empirical_info(model, theta_star, &y)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedInfo {
    pub sigma_bar: DMatrix<f64>,
    /// Smallest eigenvalue of `sigma_bar`.
    pub lambda0: f64,
}

/// Monte Carlo estimate of `Σ̄ = (1/T) Σ E[Z_t Z_tᵀ]`.
pub fn expected_info_mc(
    model: &dyn PredictorModel,
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    n_mc: usize,
    seed: u64,
) -> Result<ExpectedInfo> {
    if n_mc < 2 {
        return Err(Error::domain("expected_info_mc needs n_mc ≥ 2"));
    }
    let samples = info_samples(model, theta_star, noise, horizon, n_mc, seed)?;
    let d = model.dim();
    let mut sigma_bar = DMatrix::<f64>::zeros(d, d);
    for s in &samples {
        sigma_bar += s;
    }
    sigma_bar /= n_mc as f64;
    let lambda0 = min_eigenvalue(&sigma_bar);
    Ok(ExpectedInfo { sigma_bar, lambda0 })
}

/// Fisher information `I(θ⋆) = Σ̄ / σ_w²`.
pub fn fisher_info(sigma_bar: &DMatrix<f64>, sigma_w: f64) -> Result<DMatrix<f64>> {
    if !(sigma_w > 0.0) {
        return Err(Error::domain("σ_w must be positive"));
    }
    Ok(sigma_bar / (sigma_w * sigma_w))
}

/// Constants entering the exponential isometry bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryConstants {
    pub lambda0: f64,
    pub b1: f64,
    pub b2: f64,
    pub l1: f64,
}

impl IsometryConstants {
    /// `exp(−λ0 T^{1−b2} / (24 b1 L1²))`
    pub fn predicted_upper(&self, horizon: usize) -> f64 {
        (-self.lambda0 * (horizon as f64).powf(1.0 - self.b2) / (24.0 * self.b1 * self.l1 * self.l1)).exp()
    }

    /// `exp(−λ0 T^{1−b2} / (16 b1 L1²))`
    pub fn predicted_lower(&self, horizon: usize) -> f64 {
        (-self.lambda0 * (horizon as f64).powf(1.0 - self.b2) / (16.0 * self.b1 * self.l1 * self.l1)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryRates {
    pub upper_violation_rate: f64,
    pub lower_violation_rate: f64,
    pub predicted_upper: f64,
    pub predicted_lower: f64,
    pub replicates: usize,
}

/// Violation frequencies of the isometry events against a given `Σ̄`.
///
/// Replicate `r` uses the same trajectory stream as [`expected_info_mc`]
/// with the same `seed`.
#[allow(clippy::too_many_arguments)]
pub fn isometry_violation_rates(
    model: &dyn PredictorModel,
    theta_star: &[f64],
    sigma_bar: &DMatrix<f64>,
    noise: &NoiseSpec,
    horizon: usize,
    n_mc: usize,
    seed: u64,
    constants: &IsometryConstants,
) -> Result<IsometryRates> {
    let d = model.dim();
    if sigma_bar.nrows() != d || sigma_bar.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: sigma_bar.nrows() });
    }
    if n_mc == 0 {
        return Err(Error::domain("isometry rates need at least one replicate"));
    }
    let samples = info_samples(model, theta_star, noise, horizon, n_mc, seed)?;
    let (mut upper, mut lower) = (0usize, 0usize);
    for s in &samples {
        if min_eigenvalue(&(sigma_bar * 8.0 - s)) < -PSD_TOLERANCE {
            upper += 1;
        }
        if min_eigenvalue(&(s - sigma_bar / 16.0)) < -PSD_TOLERANCE {
            lower += 1;
        }
    }
    Ok(IsometryRates {
        upper_violation_rate: upper as f64 / n_mc as f64,
        lower_violation_rate: lower as f64 / n_mc as f64,
        predicted_upper: constants.predicted_upper(horizon),
        predicted_lower: constants.predicted_lower(horizon),
        replicates: n_mc,
    })
}

/// Estimates `Σ̄` from `bar_samples` held-out trajectories, then measures
/// isometry violations over `n_mc` fresh ones.
#[allow(clippy::too_many_arguments)]
pub fn isometry_event_rates(
    model: &dyn PredictorModel,
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    n_mc: usize,
    seed: u64,
    bar_samples: usize,
    constants: &IsometryConstants,
) -> Result<IsometryRates> {
    let bar = expected_info_mc(
        model,
        theta_star,
        noise,
        horizon,
        bar_samples,
        derive_seed(seed, b"sigma-bar", 0),
    )?;
    isometry_violation_rates(model, theta_star, &bar.sigma_bar, noise, horizon, n_mc, seed, constants)
}
