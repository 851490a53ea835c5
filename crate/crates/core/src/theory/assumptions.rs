//! Empirical (lower-bound) estimates of the identifiability constant `a`
//! and the smoothness constants `L1`, `L2`, `L3`, obtained by sweeping an
//! ε-net of the parameter class over simulated trajectories.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::harness::seed::derive_seed;
use crate::model::PredictorModel;
use crate::noise::{sample_noise, NoiseSpec};
use crate::param_space::{build_epsilon_net, distance, ParameterClass};

use super::linalg::symmetric_spectral_norm;

fn admissible_net(
    model: &dyn PredictorModel,
    class: &ParameterClass,
    net_epsilon: f64,
) -> Result<Vec<Vec<f64>>> {
    check_len(model.dim(), class.dimension())?;
    Ok(build_epsilon_net(class, net_epsilon)?
        .into_iter()
        .filter(|p| model.is_admissible(p))
        .collect())
}

fn trajectories(
    model: &dyn PredictorModel,
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    n_mc: usize,
    seed: u64,
    stream: &[u8],
) -> Result<Vec<Vec<f64>>> {
    noise.validate()?;
    if horizon == 0 || n_mc == 0 {
        return Err(Error::domain("horizon and replicate count must be positive"));
    }
    (0..n_mc)
        .into_par_iter()
        .map(|r| {
            let w = sample_noise(noise, horizon, derive_seed(seed, stream, r as u64));
            model.generate(theta_star, &w)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentifiabilityEstimate {
    /// `max_θ ‖θ − θ⋆‖² / Ê[(1/T) Σ g_t²(θ)]` over the retained net points.
    pub a: f64,
    pub points_used: usize,
    pub points_excluded: usize,
}

/// Empirical lower bound for the quadratic identifiability constant.
///
/// Net points whose Monte Carlo denominator is zero or below ten standard
/// errors are excluded; this always drops `θ⋆` itself.
#[allow(clippy::too_many_arguments)]
pub fn quad_ident_constant_mc(
    model: &dyn PredictorModel,
    class: &ParameterClass,
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    net_epsilon: f64,
    n_mc: usize,
    seed: u64,
) -> Result<IdentifiabilityEstimate> {
    check_len(model.dim(), theta_star.len())?;
    let net = admissible_net(model, class, net_epsilon)?;
    let ys = trajectories(model, theta_star, noise, horizon, n_mc, seed, b"identifiability")?;
    let star_preds: Vec<Vec<f64>> = ys
        .iter()
        .map(|y| model.predict(theta_star, y))
        .collect::<Result<_>>()?;

    let ratios: Vec<Option<f64>> = net
        .par_iter()
        .map(|theta| -> Result<Option<f64>> {
            let mut values = Vec::with_capacity(ys.len());
            for (y, base) in ys.iter().zip(&star_preds) {
                let pred = model.predict(theta, y)?;
                let gap = pred.iter().zip(base).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                values.push(gap / horizon as f64);
            }
            let est = crate::estimator::McEstimate::from_samples(&values);
            if !(est.mean > 0.0) || est.mean < 10.0 * est.std_error {
                return Ok(None);
            }
            let d2 = distance(theta, theta_star).powi(2);
            Ok(Some(d2 / est.mean))
        })
        .collect::<Result<_>>()?;

    let used: Vec<f64> = ratios.iter().flatten().copied().collect();
    if used.is_empty() {
        return Err(Error::Estimation(
            "every net point had a degenerate identifiability denominator".into(),
        ));
    }
    Ok(IdentifiabilityEstimate {
        a: used.iter().copied().fold(0.0, f64::max),
        points_used: used.len(),
        points_excluded: ratios.len() - used.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessEstimate {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// Number of `(trajectory, t, θ)` evaluations behind the maxima.
    pub samples: usize,
}

/// Largest gradient norm `‖∇_θ f_t(X_t, θ)‖` over net points and simulated
/// trajectories.
#[allow(clippy::too_many_arguments)]
pub fn gradient_bound_mc(
    model: &dyn PredictorModel,
    class: &ParameterClass,
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    net_epsilon: f64,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    check_len(model.dim(), theta_star.len())?;
    let net = admissible_net(model, class, net_epsilon)?;
    let ys = trajectories(model, theta_star, noise, horizon, n_mc, seed, b"smoothness")?;
    let maxima: Vec<f64> = ys
        .par_iter()
        .map(|y| -> Result<f64> {
            let mut best = 0.0f64;
            for theta in &net {
                best = best.max(max_row_norm(&model.gradients(theta, y)?));
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(maxima.into_iter().fold(0.0, f64::max))
}

fn max_row_norm(g: &DMatrix<f64>) -> f64 {
    g.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Empirical lower bounds for `L1` (gradient norm), `L2` (Hessian spectral
/// norm) and `L3` (Hessian Lipschitz constant over net-point pairs).
#[allow(clippy::too_many_arguments)]
pub fn smoothness_constants_mc(
    model: &dyn PredictorModel,
    class: &ParameterClass,
    theta_star: &[f64],
    noise: &NoiseSpec,
    horizon: usize,
    net_epsilon: f64,
    n_mc: usize,
    seed: u64,
) -> Result<SmoothnessEstimate> {
    check_len(model.dim(), theta_star.len())?;
    let net = admissible_net(model, class, net_epsilon)?;
    let ys = trajectories(model, theta_star, noise, horizon, n_mc, seed, b"smoothness")?;
    let per_traj: Vec<(f64, f64, f64)> = ys
        .par_iter()
        .map(|y| -> Result<(f64, f64, f64)> {
            let mut l1 = 0.0f64;
            let mut l2 = 0.0f64;
            let mut hess = Vec::with_capacity(net.len());
            for theta in &net {
                l1 = l1.max(max_row_norm(&model.gradients(theta, y)?));
                let h = model.hessians(theta, y)?;
                for v in &h {
                    l2 = l2.max(symmetric_spectral_norm(v));
                }
                hess.push(h);
            }
            let mut l3 = 0.0f64;
            for i in 0..net.len() {
                for j in i + 1..net.len() {
                    let sep = distance(&net[i], &net[j]);
                    if sep == 0.0 {
                        continue;
                    }
                    for (a, b) in hess[i].iter().zip(&hess[j]) {
                        l3 = l3.max(symmetric_spectral_norm(&(a - b)) / sep);
                    }
                }
            }
            Ok((l1, l2, l3))
        })
        .collect::<Result<_>>()?;
    let fold = |f: fn(&(f64, f64, f64)) -> f64| per_traj.iter().map(f).fold(0.0, f64::max);
    Ok(SmoothnessEstimate {
        l1: fold(|t| t.0),
        l2: fold(|t| t.1),
        l3: fold(|t| t.2),
        samples: ys.len() * horizon * net.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arma::ArmaModel;

    #[test]
    fn ar1_identifiability_is_exact_ratio() {
        let m = ArmaModel::new(1, 0);
        let class = ParameterClass::new(1, 0.9).unwrap();
        let horizon = 20;
        let est = quad_ident_constant_mc(&m, &class, &[0.0], &NoiseSpec::Rademacher { c: 1.0 }, horizon, 0.3, 8, 1).unwrap();
        let expected = horizon as f64 / (horizon as f64 - 1.0);
        assert!((est.a - expected).abs() < 1e-12, "{est:?}");
        assert!(est.points_excluded >= 1, "θ⋆ = 0 is a net point");

        let fine = quad_ident_constant_mc(&m, &class, &[0.0], &NoiseSpec::Rademacher { c: 1.0 }, horizon, 0.05, 8, 2).unwrap();
        assert!((fine.a - est.a).abs() < 1e-12);
    }

    #[test]
    fn ar1_smoothness() {
        let m = ArmaModel::new(1, 0);
        let class = ParameterClass::new(1, 0.9).unwrap();
        // Y_t = W_t at θ⋆ = 0 so |Z_t| = |W_{t−1}| = 1 for every net point.
        let s = smoothness_constants_mc(&m, &class, &[0.0], &NoiseSpec::Rademacher { c: 1.0 }, 30, 0.3, 3, 4).unwrap();
        assert_eq!(s.l1, 1.0);
        assert_eq!(s.l2, 0.0);
        assert_eq!(s.l3, 0.0);
        assert!(s.samples > 0);
        let g = gradient_bound_mc(&m, &class, &[0.0], &NoiseSpec::Rademacher { c: 1.0 }, 30, 0.3, 3, 4).unwrap();
        assert_eq!(g, s.l1);
    }

    #[test]
    fn smoothness_maxima_grow_with_samples() {
        let m = ArmaModel::new(1, 1);
        let class = ParameterClass::new(2, 0.8).unwrap();
        let noise = NoiseSpec::Uniform { c: 1.0 };
        let small = smoothness_constants_mc(&m, &class, &[0.5, 0.3], &noise, 60, 0.4, 2, 9).unwrap();
        let large = smoothness_constants_mc(&m, &class, &[0.5, 0.3], &noise, 60, 0.4, 6, 9).unwrap();
        assert!(large.l1 >= small.l1 && large.l2 >= small.l2 && large.l3 >= small.l3);
        assert!(small.l2 > 0.0 && small.l3 > 0.0);
    }
}
