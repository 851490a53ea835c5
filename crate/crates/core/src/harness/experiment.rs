//! The rate experiment: fit on simulated data over a grid of horizons and
//! measure the held-out prediction error of each fit.

use std::io::Write;

use rayon::prelude::*;

use crate::arma::{simulate, ArmaModel};
use crate::error::{Error, Result};
use crate::estimator::{fit, prediction_error_samples, McEstimate};
use crate::noise::sub_gaussian_sigma;
use crate::param_space::distance;
use crate::theory::dependency::ols;
use crate::theory::{gradient_bound_mc, prediction_error_envelope};

use super::config::ExperimentConfig;
use super::io::{format_float, write_csv};
use super::seed::{cell_index, derive_seed};

/// Largest tolerated fraction of failed fits at one horizon.
pub const MAX_FAILURE_RATE: f64 = 0.05;

pub const SIM_STREAM: &[u8] = b"sim";
pub const EVAL_STREAM: &[u8] = b"eval";
const L1_STREAM: &[u8] = b"bound-l1";

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub horizon: usize,
    pub mean_pred_error: f64,
    pub std_error: f64,
    pub mean_param_error_sq: f64,
    pub theorem1_bound: f64,
    /// Replicates that produced a fit.
    pub n_mc: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// Gradient bound used for the bound column.
    pub l1: f64,
}

pub const RATE_HEADER: [&str; 6] = [
    "T",
    "mean_pred_error",
    "std_error",
    "mean_param_error_sq",
    "theorem1_bound",
    "n_mc",
];

impl RateTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.horizon.to_string(),
                    format_float(r.mean_pred_error),
                    format_float(r.std_error),
                    format_float(r.mean_param_error_sq),
                    format_float(r.theorem1_bound),
                    r.n_mc.to_string(),
                ]
            })
            .collect();
        write_csv(out, &RATE_HEADER, &rows)
    }
}

struct CellOutcome {
    pred_error: f64,
    param_error_sq: f64,
}

fn run_cell(cfg: &ExperimentConfig, model: &ArmaModel, horizon: usize, r: usize) -> Result<Option<CellOutcome>> {
    let theta_star = cfg.truth.theta();
    let cell = cell_index(horizon, r);
    let traj = simulate(&cfg.truth, &cfg.noise, horizon, derive_seed(cfg.master_seed, SIM_STREAM, cell))?;
    let theta_hat = if cfg.diagnostic_truth {
        theta_star.clone()
    } else {
        match fit(model, &traj.y, &cfg.class, &cfg.fit) {
            Ok(f) => f.theta_hat,
            Err(Error::Estimation(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    };
    let samples = prediction_error_samples(
        model,
        &theta_hat,
        &theta_star,
        &cfg.noise,
        horizon,
        cfg.n_eval,
        derive_seed(cfg.master_seed, EVAL_STREAM, cell),
    )?;
    Ok(Some(CellOutcome {
        pred_error: samples.iter().sum::<f64>() / samples.len() as f64,
        param_error_sq: distance(&theta_hat, &theta_star).powi(2),
    }))
}

/// Gradient bound over the parameter net on trajectories of the largest
/// horizon, unless the configuration fixes it.
pub fn bound_l1(cfg: &ExperimentConfig) -> Result<f64> {
    if let Some(l1) = cfg.bound_l1 {
        return Ok(l1);
    }
    let model = ArmaModel::new(cfg.truth.p(), cfg.truth.q());
    gradient_bound_mc(
        &model,
        &cfg.class,
        &cfg.truth.theta(),
        &cfg.noise,
        *cfg.grid.last().expect("validated grid"),
        cfg.l1_net_epsilon,
        cfg.l1_samples,
        derive_seed(cfg.master_seed, L1_STREAM, 0),
    )
}

/// Runs every `(T, r)` cell in parallel and aggregates per horizon.
///
/// The table depends only on the configuration, never on scheduling.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<RateTable> {
    cfg.validate()?;
    let model = ArmaModel::new(cfg.truth.p(), cfg.truth.q());
    let cells: Vec<(usize, usize)> = cfg
        .grid
        .iter()
        .flat_map(|&t| (0..cfg.n_mc).map(move |r| (t, r)))
        .collect();
    let outcomes: Vec<Option<CellOutcome>> = cells
        .par_iter()
        .map(|&(t, r)| run_cell(cfg, &model, t, r))
        .collect::<Result<_>>()?;

    let l1 = bound_l1(cfg)?;
    let d = model.p + model.q;
    let sigma = sub_gaussian_sigma(&cfg.noise);
    let mut rows = Vec::with_capacity(cfg.grid.len());
    for (k, &horizon) in cfg.grid.iter().enumerate() {
        let block = &outcomes[k * cfg.n_mc..(k + 1) * cfg.n_mc];
        let ok: Vec<&CellOutcome> = block.iter().flatten().collect();
        let failed = block.len() - ok.len();
        if failed as f64 > MAX_FAILURE_RATE * block.len() as f64 {
            return Err(Error::Estimation(format!(
                "{failed} of {} fits failed at T = {horizon}",
                block.len()
            )));
        }
        if ok.len() < 2 {
            return Err(Error::Estimation(format!("fewer than two fits succeeded at T = {horizon}")));
        }
        let pred: Vec<f64> = ok.iter().map(|c| c.pred_error).collect();
        let est = McEstimate::from_samples(&pred);
        rows.push(RateRow {
            horizon,
            mean_pred_error: est.mean,
            std_error: est.std_error,
            mean_param_error_sq: ok.iter().map(|c| c.param_error_sq).sum::<f64>() / ok.len() as f64,
            theorem1_bound: prediction_error_envelope(
                d,
                sigma,
                cfg.class.radius(),
                l1,
                cfg.gamma,
                horizon,
                cfg.bound_c,
            ),
            n_mc: ok.len(),
        });
    }
    Ok(RateTable { rows, l1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSlope {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rows_used: usize,
}

/// Least squares of `ln mean_pred_error` on `ln T` over rows with a
/// positive mean.
pub fn fit_rate_slope(table: &RateTable) -> Result<RateSlope> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = table
        .rows
        .iter()
        .filter(|r| r.mean_pred_error > 0.0 && r.mean_pred_error.is_finite())
        .map(|r| ((r.horizon as f64).ln(), r.mean_pred_error.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::domain(format!(
            "slope fit needs three rows with positive error, got {}",
            xs.len()
        )));
    }
    let (slope, intercept, r_squared) = ols(&xs, &ys);
    Ok(RateSlope { slope, intercept, r_squared, rows_used: xs.len() })
}
