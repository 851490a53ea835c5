use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::model::PredictorModel;
use crate::param_space::norm;

use super::linalg::symmetric_spectral_norm;

fn check_inputs(
    model: &dyn PredictorModel,
    theta: &[f64],
    theta_star: &[f64],
    y: &[f64],
    w: &[f64],
) -> Result<()> {
    check_len(model.dim(), theta.len())?;
    check_len(model.dim(), theta_star.len())?;
    check_len(y.len(), w.len())?;
    if y.is_empty() {
        return Err(Error::domain("offsets need a non-empty trajectory"));
    }
    Ok(())
}

/// `g_t = f_t(X_t, θ) − f_t(X_t, θ⋆)` along the trajectory.
pub fn prediction_gap(
    model: &dyn PredictorModel,
    theta: &[f64],
    theta_star: &[f64],
    y: &[f64],
) -> Result<Vec<f64>> {
    let a = model.predict(theta, y)?;
    let b = model.predict(theta_star, y)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
}

/// `(1/T) Σ g_t²`.
pub fn mean_square_gap(
    model: &dyn PredictorModel,
    theta: &[f64],
    theta_star: &[f64],
    y: &[f64],
) -> Result<f64> {
    let g = prediction_gap(model, theta, theta_star, y)?;
    Ok(g.iter().map(|v| v * v).sum::<f64>() / y.len() as f64)
}

/// Martingale offset `M_T(θ) = (1/T) Σ (4 W_t g_t − g_t²)`.
pub fn martingale_offset(
    model: &dyn PredictorModel,
    theta: &[f64],
    theta_star: &[f64],
    y: &[f64],
    w: &[f64],
) -> Result<f64> {
    check_inputs(model, theta, theta_star, y, w)?;
    let g = prediction_gap(model, theta, theta_star, y)?;
    let sum: f64 = g.iter().zip(w).map(|(g, w)| 4.0 * w * g - g * g).sum();
    Ok(sum / y.len() as f64)
}

/// Linear predictions `Z_tᵀ Δ` with `Z_t = ∇_θ f_t(X_t, θ⋆)`, `Δ = θ − θ⋆`.
pub fn linear_gap(
    model: &dyn PredictorModel,
    theta: &[f64],
    theta_star: &[f64],
    y: &[f64],
) -> Result<Vec<f64>> {
    let z = model.gradients(theta_star, y)?;
    let delta = nalgebra::DVector::from_iterator(
        theta.len(),
        theta.iter().zip(theta_star).map(|(a, b)| a - b),
    );
    Ok((z * delta).iter().copied().collect())
}

/// Linearized offset `M̄_T(θ) = (1/T) Σ [4 W_t Z_tᵀΔ − ½ (Z_tᵀΔ)²]`.
pub fn linearized_offset(
    model: &dyn PredictorModel,
    theta: &[f64],
    theta_star: &[f64],
    y: &[f64],
    w: &[f64],
) -> Result<f64> {
    check_inputs(model, theta, theta_star, y, w)?;
    let zd = linear_gap(model, theta, theta_star, y)?;
    let sum: f64 = zd.iter().zip(w).map(|(z, w)| 4.0 * w * z - 0.5 * z * z).sum();
    Ok(sum / y.len() as f64)
}

/// Both sides of the second-order offset bound
/// `M_T(θ̂) ≤ M̄_T(θ̂) + ‖(2/T) Σ W_t V_t‖·‖Δ‖² + (L2²/4)·‖Δ‖⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `M̄_T(θ̂)`
    pub linearized: f64,
    /// `(‖(2/T) Σ W_t V_t(θ⋆)‖ + (2/T) Σ |W_t| · L3 ‖Δ‖) · ‖Δ‖²`
    pub curvature: f64,
    /// `(L2²/4) ‖Δ‖⁴`
    pub quartic: f64,
}

/// Evaluates the offset decomposition with `V_t` taken at `θ⋆`.
///
/// The Hessian in the exact expansion sits at an unknown point on the
/// segment `[θ⋆, θ̂]`; with an `L3`-Lipschitz Hessian the difference in the
/// noise-weighted term is at most `(2/T) Σ |W_t| · L3 ‖Δ‖ · ‖Δ‖²`, which is
/// added to the curvature term.
pub fn taylor_decomposition_check(
    model: &dyn PredictorModel,
    theta_hat: &[f64],
    theta_star: &[f64],
    y: &[f64],
    w: &[f64],
    l2: f64,
    l3: f64,
) -> Result<TaylorCheck> {
    check_inputs(model, theta_hat, theta_star, y, w)?;
    if !(l2 >= 0.0 && l3 >= 0.0) {
        return Err(Error::domain("L2 and L3 must be nonnegative"));
    }
    let n = y.len() as f64;
    let lhs = martingale_offset(model, theta_hat, theta_star, y, w)?;
    let linearized = linearized_offset(model, theta_hat, theta_star, y, w)?;

    let d = model.dim();
    let hessians = model.hessians(theta_star, y)?;
    let mut weighted = DMatrix::<f64>::zeros(d, d);
    for (v, wt) in hessians.iter().zip(w) {
        weighted += v * (2.0 * wt / n);
    }
    let delta: Vec<f64> = theta_hat.iter().zip(theta_star).map(|(a, b)| a - b).collect();
    let dn = norm(&delta);
    let abs_noise = 2.0 * w.iter().map(|v| v.abs()).sum::<f64>() / n;
    let curvature = (symmetric_spectral_norm(&weighted) + abs_noise * l3 * dn) * dn * dn;
    let quartic = l2 * l2 / 4.0 * dn.powi(4);
    let rhs = linearized + curvature + quartic;
    let slack = 8.0 * f64::EPSILON * (lhs.abs() + linearized.abs() + curvature + quartic);
    Ok(TaylorCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + slack,
        linearized,
        curvature,
        quartic,
    })
}
