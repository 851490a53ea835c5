#![allow(dead_code)]

use nalgebra::DMatrix;
use qpem::arma::{check_stability, predict_gradients, predict_sequence, ArmaParams};
use rand::Rng;

/// Random ARMA parameters of the given orders whose AR and MA roots lie
/// outside the disc of radius `1 + margin`.
pub fn random_arma<R: Rng>(rng: &mut R, p: usize, q: usize, scale: f64, margin: f64) -> ArmaParams {
    loop {
        let ar: Vec<f64> = (0..p).map(|_| rng.random_range(-scale..scale)).collect();
        let ma: Vec<f64> = (0..q).map(|_| rng.random_range(-scale..scale)).collect();
        let params = ArmaParams::new(ar, ma);
        let r = check_stability(&params, margin);
        if r.stable && r.invertible {
            return params;
        }
    }
}

fn with_theta(params: &ArmaParams, theta: &[f64]) -> ArmaParams {
    ArmaParams::from_theta(params.p(), params.q(), theta).unwrap()
}

/// Central differences of the predictions, one column per parameter.
pub fn fd_gradients(params: &ArmaParams, y: &[f64], h: f64) -> DMatrix<f64> {
    let theta = params.theta();
    let mut g = DMatrix::zeros(y.len(), theta.len());
    for k in 0..theta.len() {
        let (mut up, mut down) = (theta.clone(), theta.clone());
        up[k] += h;
        down[k] -= h;
        let a = predict_sequence(&with_theta(params, &up), y).unwrap();
        let b = predict_sequence(&with_theta(params, &down), y).unwrap();
        for t in 0..y.len() {
            g[(t, k)] = (a[t] - b[t]) / (2.0 * h);
        }
    }
    g
}

/// Central differences of the analytic gradients: entry `t` approximates
/// the Hessian at step `t`.
pub fn fd_hessians(params: &ArmaParams, y: &[f64], h: f64) -> Vec<DMatrix<f64>> {
    let theta = params.theta();
    let d = theta.len();
    let mut out = vec![DMatrix::zeros(d, d); y.len()];
    for k in 0..d {
        let (mut up, mut down) = (theta.clone(), theta.clone());
        up[k] += h;
        down[k] -= h;
        let a = predict_gradients(&with_theta(params, &up), y).unwrap();
        let b = predict_gradients(&with_theta(params, &down), y).unwrap();
        for t in 0..y.len() {
            for j in 0..d {
                out[t][(j, k)] = (a[(t, j)] - b[(t, j)]) / (2.0 * h);
            }
        }
    }
    out
}

/// `max |a − b| / max(max |a|, floor)`.
pub fn relative_error(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).abs().max() / a.abs().max().max(floor)
}
