use nalgebra::DMatrix;

use crate::error::Result;

/// A family of time-varying one-step predictors `f_t(X_t, θ)` where the
/// regressor `X_t` is the output history `Y_0, …, Y_{t-1}`.
///
/// Implementations must be strictly causal: entry `t` of every returned
/// sequence depends on `y[..t]` only.
pub trait PredictorModel: Sync {
    /// Number of free parameters `d_θ`.
    fn dim(&self) -> usize;

    /// Predictions `f_t(X_t, θ)` for `t = 0..y.len()`.
    fn predict(&self, theta: &[f64], y: &[f64]) -> Result<Vec<f64>>;

    /// Predictions together with the `T × d_θ` matrix whose rows are
    /// `∇_θ f_t(X_t, θ)ᵀ`.
    fn predict_with_gradients(&self, theta: &[f64], y: &[f64])
        -> Result<(Vec<f64>, DMatrix<f64>)>;

    /// Parameter Hessians `∇²_θ f_t(X_t, θ)`, one symmetric matrix per step.
    fn hessians(&self, theta: &[f64], y: &[f64]) -> Result<Vec<DMatrix<f64>>>;

    /// Generates outputs `Y` driven by the noise sequence `w` under `θ`.
    fn generate(&self, theta: &[f64], w: &[f64]) -> Result<Vec<f64>>;

    /// Whether the predictor recursion is well behaved at `θ`.
    fn is_admissible(&self, _theta: &[f64]) -> bool {
        true
    }

    fn gradients(&self, theta: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
        self.predict_with_gradients(theta, y).map(|(_, g)| g)
    }
}
