//! Quadratic prediction error estimation.
//!
//! The criterion is `L_T(θ) = (1/T) Σ (Y_t − f_t(X_t, θ))²`. It is minimized
//! over the parameter ball by projected Levenberg–Marquardt iterations run
//! from several lattice starting points; the lowest terminal loss wins.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::harness::seed::derive_seed;
use crate::model::PredictorModel;
use crate::noise::{sample_noise, NoiseSpec};
use crate::param_space::{self, build_epsilon_net, distance, norm, ParameterClass};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub n_starts: usize,
    /// Lattice resolution for the starting points; `None` means radius / 4.
    pub start_net_epsilon: Option<f64>,
    pub max_iterations: usize,
    /// Tolerance on the projected-gradient stationarity measure.
    pub gradient_tolerance: f64,
    pub levenberg_damping_init: f64,
    /// Extra starting point, typically the true parameter in diagnostics.
    pub truth_start: Option<Vec<f64>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_starts: 8,
            start_net_epsilon: None,
            max_iterations: 200,
            gradient_tolerance: 1e-10,
            levenberg_damping_init: 1e-3,
            truth_start: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 || self.max_iterations == 0 {
            return Err(Error::domain("n_starts and max_iterations must be positive"));
        }
        if let Some(eps) = self.start_net_epsilon {
            if !(eps > 0.0) {
                return Err(Error::domain("start_net_epsilon must be positive"));
            }
        }
        if !(self.gradient_tolerance > 0.0 && self.levenberg_damping_init > 0.0) {
            return Err(Error::domain("tolerance and damping must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    pub loss: f64,
    pub starts_used: usize,
    pub iterations_total: usize,
    pub converged: bool,
}

/// Terminal state of one Levenberg–Marquardt run.
#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub start: Vec<f64>,
    pub theta: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Loss after the start and after every accepted step.
    pub loss_trace: Vec<f64>,
}

/// `L_T(θ) = (1/T) Σ e_t²`.
pub fn loss(model: &dyn PredictorModel, theta: &[f64], y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::domain("loss of an empty trajectory"));
    }
    check_len(model.dim(), theta.len())?;
    let yhat = model.predict(theta, y)?;
    Ok(mean_square_diff(y, &yhat))
}

pub(crate) fn mean_square_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Closed-form least squares for AR(1), projected onto `[-B, B]`.
pub fn closed_form_ar1(y: &[f64], class: &ParameterClass) -> Result<f64> {
    check_len(1, class.dimension())?;
    if y.len() < 2 {
        return Err(Error::domain("closed-form AR(1) needs at least two samples"));
    }
    let (num, den) = y.windows(2).fold((0.0, 0.0), |(n, d), w| (n + w[0] * w[1], d + w[0] * w[0]));
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(param_space::project(&[num / den], class)?[0])
}

struct Linearization {
    loss: f64,
    /// `Zᵀ Z`
    normal: DMatrix<f64>,
    /// `Zᵀ e`
    rhs: DVector<f64>,
}

fn linearize(model: &dyn PredictorModel, theta: &[f64], y: &[f64]) -> Result<Linearization> {
    let (yhat, z) = model.predict_with_gradients(theta, y)?;
    let e = DVector::from_iterator(y.len(), y.iter().zip(&yhat).map(|(a, b)| a - b));
    let loss = e.norm_squared() / y.len() as f64;
    Ok(Linearization {
        loss,
        normal: z.tr_mul(&z),
        rhs: z.tr_mul(&e),
    })
}

/// `‖θ − P(θ − ∇L)‖`, zero exactly at constrained stationary points.
fn stationarity(theta: &[f64], grad: &DVector<f64>, class: &ParameterClass) -> Result<f64> {
    let moved: Vec<f64> = theta.iter().zip(grad.iter()).map(|(t, g)| t - g).collect();
    Ok(distance(theta, &class.project(&moved)?))
}

fn damped_step(lin: &Linearization, mu: f64) -> Option<DVector<f64>> {
    let d = lin.normal.nrows();
    let max_diag = (0..d).map(|k| lin.normal[(k, k)]).fold(0.0, f64::max);
    let floor = (1e-12 * max_diag).max(f64::MIN_POSITIVE);
    let mut a = lin.normal.clone();
    for k in 0..d {
        a[(k, k)] += mu * lin.normal[(k, k)].max(floor);
    }
    a.cholesky().map(|c| c.solve(&lin.rhs))
}

/// Projected Levenberg–Marquardt from a single starting point.
///
/// A step is accepted only if it strictly lowers the loss and keeps the
/// predictor admissible, so `loss_trace` is non-increasing.
pub fn fit_from_start(
    model: &dyn PredictorModel,
    y: &[f64],
    class: &ParameterClass,
    start: &[f64],
    config: &FitConfig,
) -> Result<StartOutcome> {
    let n = y.len() as f64;
    let mut theta = class.project(start)?;
    if !model.is_admissible(&theta) {
        return Err(Error::Estimation(format!("start {theta:?} is not admissible")));
    }
    let mut lin = linearize(model, &theta, y)?;
    if !lin.loss.is_finite() {
        return Err(Error::Estimation(format!("non-finite loss at start {theta:?}")));
    }
    let mut trace = vec![lin.loss];
    let mut mu = config.levenberg_damping_init;
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < config.max_iterations {
        let grad = &lin.rhs * (-2.0 / n);
        if stationarity(&theta, &grad, class)? <= config.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        loop {
            if mu > 1e20 {
                // No damping level yields descent: numerically stationary.
                converged = true;
                break 'outer;
            }
            let Some(step) = damped_step(&lin, mu) else {
                mu *= 10.0;
                continue;
            };
            let raw: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            let candidate = class.project(&raw)?;
            if distance(&candidate, &theta) <= 1e-15 * (1.0 + norm(&theta)) {
                converged = true;
                break 'outer;
            }
            if !model.is_admissible(&candidate) {
                mu *= 10.0;
                continue;
            }
            let next = linearize(model, &candidate, y)?;
            if next.loss.is_finite() && next.loss < lin.loss {
                theta = candidate;
                lin = next;
                trace.push(lin.loss);
                mu = (mu / 10.0).max(1e-15);
                break;
            }
            mu *= 10.0;
        }
    }

    Ok(StartOutcome {
        start: start.to_vec(),
        theta,
        loss: lin.loss,
        iterations,
        converged,
        loss_trace: trace,
    })
}

/// Starting points: the origin, `n_starts` evenly spread admissible lattice
/// points, and the optional extra start.
pub fn starting_points(
    model: &dyn PredictorModel,
    class: &ParameterClass,
    config: &FitConfig,
) -> Result<Vec<Vec<f64>>> {
    let eps = config.start_net_epsilon.unwrap_or(class.radius() / 4.0);
    let origin = vec![0.0; class.dimension()];
    let pool: Vec<Vec<f64>> = build_epsilon_net(class, eps)?
        .into_iter()
        .filter(|p| *p != origin && model.is_admissible(p))
        .collect();
    let mut starts = vec![origin];
    let k = config.n_starts.min(pool.len());
    for i in 0..k {
        // centred evenly spaced picks over the lexicographically sorted pool
        let idx = ((2 * i + 1) * pool.len()) / (2 * k);
        starts.push(pool[idx].clone());
    }
    if let Some(truth) = &config.truth_start {
        check_len(class.dimension(), truth.len())?;
        starts.push(truth.clone());
    }
    Ok(starts)
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Multi-start projected Levenberg–Marquardt approximation of the
/// constrained least-squares estimate.
///
/// Ties in terminal loss are broken by the lexicographically smallest θ.
pub fn fit(
    model: &dyn PredictorModel,
    y: &[f64],
    class: &ParameterClass,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    check_len(model.dim(), class.dimension())?;
    if y.len() < model.dim() + 1 {
        return Err(Error::domain(format!(
            "fit needs at least d_θ + 1 = {} samples, got {}",
            model.dim() + 1,
            y.len()
        )));
    }
    if let Some(t) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!("non-finite output at t = {t}")));
    }
    let starts = starting_points(model, class, config)?;
    let mut best: Option<StartOutcome> = None;
    let mut failures = Vec::new();
    let mut iterations_total = 0;
    let mut starts_used = 0;
    for start in &starts {
        match fit_from_start(model, y, class, start, config) {
            Ok(outcome) => {
                starts_used += 1;
                iterations_total += outcome.iterations;
                let better = match &best {
                    None => true,
                    Some(b) => {
                        outcome.loss < b.loss
                            || (outcome.loss == b.loss
                                && lexicographic(&outcome.theta, &b.theta).is_lt())
                    }
                };
                if better {
                    best = Some(outcome);
                }
            }
            Err(e) => failures.push(format!("{start:?}: {e}")),
        }
    }
    let best = best.ok_or_else(|| {
        Error::Estimation(format!(
            "all {} starts failed: {}",
            starts.len(),
            failures.join("; ")
        ))
    })?;
    let final_loss = loss(model, &best.theta, y)?;
    Ok(FitResult {
        theta_hat: best.theta,
        loss: final_loss,
        starts_used,
        iterations_total,
        converged: best.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
        }
    }
}

/// Per-replicate values `(1/T) Σ (f_t(X̄_t, θ̂) − f_t(X̄_t, θ⋆))²` on fresh
/// trajectories generated under `θ⋆`.
pub fn prediction_error_samples(
    model: &dyn PredictorModel,
    theta_hat: &[f64],
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_len(model.dim(), theta_hat.len())?;
    check_len(model.dim(), theta_star.len())?;
    noise.validate()?;
    if horizon == 0 {
        return Err(Error::domain("horizon must be positive"));
    }
    (0..n_mc)
        .into_par_iter()
        .map(|r| {
            let w = sample_noise(noise, horizon, derive_seed(seed, b"prediction-error", r as u64));
            let y = model.generate(theta_star, &w)?;
            let a = model.predict(theta_hat, &y)?;
            let b = model.predict(theta_star, &y)?;
            Ok(mean_square_diff(&a, &b))
        })
        .collect()
}

/// Monte Carlo estimate of the mean-squared prediction error of `θ̂`.
pub fn prediction_error_mc(
    model: &dyn PredictorModel,
    theta_hat: &[f64],
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    n_mc: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_mc < 2 {
        return Err(Error::domain("prediction_error_mc needs n_mc ≥ 2"));
    }
    let samples =
        prediction_error_samples(model, theta_hat, theta_star, noise, horizon, n_mc, seed)?;
    Ok(McEstimate::from_samples(&samples))
}
