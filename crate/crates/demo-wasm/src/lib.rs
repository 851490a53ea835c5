//! WebAssembly bindings for the browser demo. Each export returns a JSON
//! string; the `*_json` functions hold the logic and run natively too.

use nalgebra::DMatrix;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qpem::arma::ArmaParams;
use qpem::estimator::FitConfig;
use qpem::harness::config::ExperimentConfig;
use qpem::harness::{fit_rate_slope, run_rate_experiment};
use qpem::noise::NoiseSpec;
use qpem::param_space::ParameterClass;
use qpem::theory::{burn_in_times, dependency_matrix_markov, ConstantSet};

fn noise_named(kind: &str) -> Result<NoiseSpec, String> {
    match kind {
        "uniform" => Ok(NoiseSpec::Uniform { c: 1.0 }),
        "rademacher" => Ok(NoiseSpec::Rademacher { c: 1.0 }),
        "truncated_gaussian" => Ok(NoiseSpec::TruncatedGaussian { sigma: 1.0, c: 3.0 }),
        other => Err(format!("unknown noise `{other}`")),
    }
}

/// Small ARMA(1, 1) rate experiment (AR(1) when `ma` is 0) on the horizons
/// `2^min_log2 ..= 2^max_log2`.
pub fn rate_curve_json(ar: f64, ma: f64, noise: &str, min_log2: u32, max_log2: u32, n_mc: usize, seed: u64) -> Result<Value, String> {
    if !(4..=16).contains(&min_log2) || max_log2 < min_log2 + 2 || max_log2 > 16 {
        return Err("need 4 ≤ min_log2 and min_log2 + 2 ≤ max_log2 ≤ 16".into());
    }
    let truth = ArmaParams::new(vec![ar], if ma == 0.0 { vec![] } else { vec![ma] });
    let dim = truth.p() + truth.q();
    let cfg = ExperimentConfig {
        truth,
        noise: noise_named(noise)?,
        class: ParameterClass::new(dim, 0.95).map_err(|e| e.to_string())?,
        grid: (min_log2..=max_log2).map(|k| 1usize << k).collect(),
        n_mc,
        n_eval: 2,
        master_seed: seed,
        gamma: 0.25,
        bound_c: 653.0,
        bound_l1: None,
        l1_samples: 1,
        l1_net_epsilon: 0.2,
        fit: FitConfig { n_starts: 3, ..FitConfig::default() },
        diagnostic_truth: false,
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let table = run_rate_experiment(&cfg).map_err(|e| e.to_string())?;
    let slope = fit_rate_slope(&table).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            json!({
                "T": r.horizon,
                "mean": r.mean_pred_error,
                "se": r.std_error,
                "param_sq": r.mean_param_error_sq,
                "bound": r.theorem1_bound,
            })
        })
        .collect();
    Ok(json!({ "rows": rows, "slope": slope.slope, "r_squared": slope.r_squared, "d": dim }))
}

/// Dependency matrix of the symmetric two-state chain flipping with
/// probability `rho`, started from its stationary law.
pub fn dependency_gamma_json(rho: f64, horizon: usize) -> Result<Value, String> {
    if !(0.0..=1.0).contains(&rho) {
        return Err("rho must lie in [0, 1]".into());
    }
    if horizon == 0 || horizon > 128 {
        return Err("horizon must lie in 1..=128".into());
    }
    let p = DMatrix::from_row_slice(2, 2, &[1.0 - rho, rho, rho, 1.0 - rho]);
    let d = dependency_matrix_markov(&p, &[0.5, 0.5], horizon).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = d.gamma.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(json!({ "gamma": rows, "spectral_norm": d.spectral_norm }))
}

#[allow(clippy::too_many_arguments)]
pub fn burn_in_json(
    d_theta: usize,
    sigma_w: f64,
    b_theta: f64,
    l1: f64,
    l2: f64,
    l3: f64,
    a: f64,
    lambda0: f64,
    b1: f64,
    b2: f64,
    gamma: f64,
) -> Result<Value, String> {
    let k = ConstantSet { d_theta, sigma_w, b_theta, l1, l2, l3, a, lambda0, b1, b2, gamma };
    let r = burn_in_times(&k).map_err(|e| e.to_string())?;
    Ok(json!({
        "T1": r.t1, "T21": r.t21, "T22": r.t22, "T23": r.t23, "T2": r.t2, "T3": r.t3, "T0": r.t0,
        "C1": r.c1, "C2": r.c2, "C3": r.c3, "C4": r.c4, "C5": r.c5,
        "floored": r.floored,
    }))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn rate_curve(ar: f64, ma: f64, noise: &str, min_log2: u32, max_log2: u32, n_mc: usize, seed: u32) -> Result<String, JsValue> {
    to_js(rate_curve_json(ar, ma, noise, min_log2, max_log2, n_mc, seed.into()))
}

#[wasm_bindgen]
pub fn dependency_gamma(rho: f64, horizon: usize) -> Result<String, JsValue> {
    to_js(dependency_gamma_json(rho, horizon))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn burn_in(
    d_theta: usize,
    sigma_w: f64,
    b_theta: f64,
    l1: f64,
    l2: f64,
    l3: f64,
    a: f64,
    lambda0: f64,
    b1: f64,
    b2: f64,
    gamma: f64,
) -> Result<String, JsValue> {
    to_js(burn_in_json(d_theta, sigma_w, b_theta, l1, l2, l3, a, lambda0, b1, b2, gamma))
}
