//! Scalar ARMA(p, q) models in predictor form.
//!
//! The model is `Y_t = Σ a_i Y_{t-i} + W_t + Σ b_j W_{t-j}` with `b_0 = 1`
//! and zero pre-history. Its one-step predictor solves
//! `B(z⁻¹) Ŷ_t = [B(z⁻¹) − A(z⁻¹)] Y_t`, i.e.
//!
//! ```text
//! Ŷ_t = Σ_i a_i Y_{t-i} + Σ_j b_j (Y_{t-j} − Ŷ_{t-j})
//! ```
//!
//! First and second parameter sensitivities are obtained by differentiating
//! that recursion; each one is again a filter through `1/B(z⁻¹)`.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::model::PredictorModel;
use crate::noise::{sample_noise, NoiseSpec};

/// Default root margin used when stability or invertibility is required.
pub const DEFAULT_ROOT_MARGIN: f64 = 0.05;

/// ARMA coefficients `(a_1..a_p, b_1..b_q)`; `b_0` is fixed to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaParams {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
}

impl ArmaParams {
    pub fn new(ar: Vec<f64>, ma: Vec<f64>) -> Self {
        Self { ar, ma }
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    pub fn q(&self) -> usize {
        self.ma.len()
    }

    pub fn order(&self) -> ArmaModel {
        ArmaModel::new(self.p(), self.q())
    }

    /// Free-parameter vector `θ = (a_1..a_p, b_1..b_q)`.
    pub fn theta(&self) -> Vec<f64> {
        self.ar.iter().chain(&self.ma).copied().collect()
    }

    pub fn from_theta(p: usize, q: usize, theta: &[f64]) -> Result<Self> {
        check_len(p + q, theta.len())?;
        Ok(Self {
            ar: theta[..p].to_vec(),
            ma: theta[p..].to_vec(),
        })
    }
}

/// Output record of [`check_stability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootReport {
    pub ar_root_min_modulus: f64,
    pub ma_root_min_modulus: f64,
    pub stable: bool,
    pub invertible: bool,
}

/// Smallest root modulus of `1 + Σ_{k≥1} c_k λ^k`.
///
/// The roots are the reciprocals of the eigenvalues of the companion matrix
/// of the reversed polynomial `z^n + c_1 z^{n-1} + … + c_n`, so the answer is
/// `1 / spectral_radius`. Vanishing leading coefficients give zero
/// eigenvalues, i.e. roots at infinity.
fn min_root_modulus(c: &[f64]) -> f64 {
    let n = c.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let radius = if n == 1 {
        c[0].abs()
    } else {
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for (k, &ck) in c.iter().enumerate() {
            companion[(0, k)] = -ck;
        }
        for k in 1..n {
            companion[(k, k - 1)] = 1.0;
        }
        companion
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    };
    if radius == 0.0 {
        f64::INFINITY
    } else {
        1.0 / radius
    }
}

/// Root locations of `A(λ) = 1 − Σ a_i λ^i` and `B(λ) = 1 + Σ b_j λ^j`.
///
/// Stable (invertible) iff every root of `A` (`B`) has modulus strictly
/// greater than `1 + margin`.
pub fn check_stability(params: &ArmaParams, margin: f64) -> RootReport {
    let neg_ar: Vec<f64> = params.ar.iter().map(|a| -a).collect();
    let ar_min = min_root_modulus(&neg_ar);
    let ma_min = min_root_modulus(&params.ma);
    RootReport {
        ar_root_min_modulus: ar_min,
        ma_root_min_modulus: ma_min,
        stable: ar_min > 1.0 + margin,
        invertible: ma_min > 1.0 + margin,
    }
}

/// Aligned output, noise and prediction sequences of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub y: Vec<f64>,
    pub w: Option<Vec<f64>>,
    pub yhat: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn from_outputs(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::domain("trajectory must contain at least one sample"));
        }
        Ok(Self { y, w: None, yhat: None })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Fills `yhat` with the one-step predictions under `params`.
    pub fn with_predictions(mut self, params: &ArmaParams) -> Result<Self> {
        self.yhat = Some(predict_sequence(params, &self.y)?);
        Ok(self)
    }
}

fn check_finite(y: &[f64]) -> Result<()> {
    match y.iter().position(|v| !v.is_finite()) {
        Some(t) => Err(Error::domain(format!("non-finite output at t = {t}"))),
        None => Ok(()),
    }
}

/// ARMA output recursion driven by an explicit noise sequence.
pub fn simulate_with_noise(params: &ArmaParams, w: &[f64]) -> Trajectory {
    let y = generate_outputs(&params.ar, &params.ma, w);
    Trajectory {
        y,
        w: Some(w.to_vec()),
        yhat: None,
    }
}

/// Draws `len` noise samples with `seed` and runs the output recursion.
pub fn simulate(params: &ArmaParams, noise: &NoiseSpec, len: usize, seed: u64) -> Result<Trajectory> {
    if len == 0 {
        return Err(Error::domain("simulation length must be at least 1"));
    }
    noise.validate()?;
    let w = sample_noise(noise, len, seed);
    Ok(simulate_with_noise(params, &w))
}

fn generate_outputs(ar: &[f64], ma: &[f64], w: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; w.len()];
    for t in 0..w.len() {
        let mut acc = w[t];
        for (i, a) in ar.iter().enumerate() {
            if let Some(s) = t.checked_sub(i + 1) {
                acc += a * y[s];
            }
        }
        for (j, b) in ma.iter().enumerate() {
            if let Some(s) = t.checked_sub(j + 1) {
                acc += b * w[s];
            }
        }
        y[t] = acc;
    }
    y
}

/// Runs `s_t = x_t − Σ_j b_j s_{t-j}` in place, i.e. applies `1/B(z⁻¹)`.
fn inverse_ma_filter(ma: &[f64], x: &mut [f64]) {
    if ma.is_empty() {
        return;
    }
    for t in 0..x.len() {
        let mut acc = x[t];
        for (j, b) in ma.iter().enumerate() {
            if let Some(s) = t.checked_sub(j + 1) {
                acc -= b * x[s];
            }
        }
        x[t] = acc;
    }
}

/// Returns `(Ŷ, ε)` with `ε_t = Y_t − Ŷ_t`.
fn predictions_and_innovations(ar: &[f64], ma: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut yhat = vec![0.0; n];
    let mut eps = vec![0.0; n];
    for t in 0..n {
        let mut acc = 0.0;
        for (i, a) in ar.iter().enumerate() {
            if let Some(s) = t.checked_sub(i + 1) {
                acc += a * y[s];
            }
        }
        for (j, b) in ma.iter().enumerate() {
            if let Some(s) = t.checked_sub(j + 1) {
                acc += b * eps[s];
            }
        }
        yhat[t] = acc;
        eps[t] = y[t] - acc;
    }
    (yhat, eps)
}

/// Shifted copy: `out_t = x_{t-lag}`, zero for `t < lag`.
fn lagged(x: &[f64], lag: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    if lag < x.len() {
        out[lag..].copy_from_slice(&x[..x.len() - lag]);
    }
    out
}

/// Gradient columns `∂Ŷ/∂θ_k`, ordered `(a_1..a_p, b_1..b_q)`.
fn gradient_columns(ar: &[f64], ma: &[f64], y: &[f64], eps: &[f64]) -> Vec<Vec<f64>> {
    let mut cols = Vec::with_capacity(ar.len() + ma.len());
    for i in 1..=ar.len() {
        let mut c = lagged(y, i);
        inverse_ma_filter(ma, &mut c);
        cols.push(c);
    }
    for k in 1..=ma.len() {
        let mut c = lagged(eps, k);
        inverse_ma_filter(ma, &mut c);
        cols.push(c);
    }
    cols
}

/// One-step predictions `Ŷ_0..Ŷ_{T-1}` with zero pre-history.
pub fn predict_sequence(params: &ArmaParams, y: &[f64]) -> Result<Vec<f64>> {
    check_finite(y)?;
    Ok(predictions_and_innovations(&params.ar, &params.ma, y).0)
}

/// `T × (p+q)` matrix with rows `∇_θ Ŷ_tᵀ`.
pub fn predict_gradients(params: &ArmaParams, y: &[f64]) -> Result<DMatrix<f64>> {
    check_finite(y)?;
    let (_, eps) = predictions_and_innovations(&params.ar, &params.ma, y);
    Ok(columns_to_matrix(
        y.len(),
        gradient_columns(&params.ar, &params.ma, y, &eps),
    ))
}

fn columns_to_matrix(rows: usize, cols: Vec<Vec<f64>>) -> DMatrix<f64> {
    let ncols = cols.len();
    DMatrix::from_vec(rows, ncols, cols.into_iter().flatten().collect())
}

/// Per-step Hessians `∇²_θ Ŷ_t`.
///
/// `∂²Ŷ/∂a∂a ≡ 0`; the mixed and MA-MA blocks follow from
/// `B·∂²Ŷ_t/∂a_i∂b_k = −∂Ŷ_{t-k}/∂a_i` and
/// `B·∂²Ŷ_t/∂b_k∂b_l = −∂Ŷ_{t-l}/∂b_k − ∂Ŷ_{t-k}/∂b_l`.
pub fn predict_hessians(params: &ArmaParams, y: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    check_finite(y)?;
    let (p, q) = (params.p(), params.q());
    let d = p + q;
    let n = y.len();
    let mut out = vec![DMatrix::<f64>::zeros(d, d); n];
    if q == 0 {
        return Ok(out);
    }
    let (_, eps) = predictions_and_innovations(&params.ar, &params.ma, y);
    let grads = gradient_columns(&params.ar, &params.ma, y, &eps);

    let mut fill = |u: usize, v: usize, s: &[f64]| {
        for (m, &val) in out.iter_mut().zip(s) {
            m[(u, v)] = val;
            m[(v, u)] = val;
        }
    };

    for (i, ga) in grads.iter().take(p).enumerate() {
        for k in 1..=q {
            let mut s: Vec<f64> = lagged(ga, k).iter().map(|x| -x).collect();
            inverse_ma_filter(&params.ma, &mut s);
            fill(i, p + k - 1, &s);
        }
    }
    for k in 1..=q {
        for l in k..=q {
            let gk = lagged(&grads[p + k - 1], l);
            let gl = lagged(&grads[p + l - 1], k);
            let mut s: Vec<f64> = gk.iter().zip(&gl).map(|(a, b)| -a - b).collect();
            inverse_ma_filter(&params.ma, &mut s);
            fill(p + k - 1, p + l - 1, &s);
        }
    }
    Ok(out)
}

/// Prediction residuals `e_t = Y_t − Ŷ_t`.
pub fn residuals(params: &ArmaParams, y: &[f64]) -> Result<Vec<f64>> {
    check_finite(y)?;
    Ok(predictions_and_innovations(&params.ar, &params.ma, y).1)
}

/// ARMA(p, q) structure; parameters are supplied as `θ = (a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArmaModel {
    pub p: usize,
    pub q: usize,
}

impl ArmaModel {
    pub fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    pub fn params(&self, theta: &[f64]) -> Result<ArmaParams> {
        ArmaParams::from_theta(self.p, self.q, theta)
    }
}

impl PredictorModel for ArmaModel {
    fn dim(&self) -> usize {
        self.p + self.q
    }

    fn predict(&self, theta: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        predict_sequence(&self.params(theta)?, y)
    }

    fn predict_with_gradients(&self, theta: &[f64], y: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let params = self.params(theta)?;
        check_finite(y)?;
        let (yhat, eps) = predictions_and_innovations(&params.ar, &params.ma, y);
        let g = columns_to_matrix(y.len(), gradient_columns(&params.ar, &params.ma, y, &eps));
        Ok((yhat, g))
    }

    fn hessians(&self, theta: &[f64], y: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        predict_hessians(&self.params(theta)?, y)
    }

    fn generate(&self, theta: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let params = self.params(theta)?;
        Ok(generate_outputs(&params.ar, &params.ma, w))
    }

    fn is_admissible(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim() && min_root_modulus(&theta[self.p..]) > 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn root_examples() {
        let r = check_stability(&ArmaParams::new(vec![0.5], vec![]), 0.0);
        assert!((r.ar_root_min_modulus - 2.0).abs() < 1e-12 && r.stable);
        assert!(r.ma_root_min_modulus.is_infinite() && r.invertible);

        let r = check_stability(&ArmaParams::new(vec![1.0], vec![]), 0.0);
        assert!((r.ar_root_min_modulus - 1.0).abs() < 1e-12 && !r.stable);

        let r = check_stability(&ArmaParams::new(vec![], vec![0.5]), 0.0);
        assert!((r.ma_root_min_modulus - 2.0).abs() < 1e-12 && r.invertible);

        let r = check_stability(&ArmaParams::new(vec![], vec![]), 0.0);
        assert!(r.stable && r.invertible && r.ar_root_min_modulus.is_infinite());
    }

    #[test]
    fn higher_order_roots_match_factorization() {
        // A(λ) = (1 − 0.5λ)(1 − 0.25λ) = 1 − 0.75λ + 0.125λ²
        let r = check_stability(&ArmaParams::new(vec![0.75, -0.125], vec![]), 0.05);
        assert!((r.ar_root_min_modulus - 2.0).abs() < 1e-10);
        // B(λ) = 1 + 0.25λ² has roots ±2i.
        let r = check_stability(&ArmaParams::new(vec![], vec![0.0, 0.25]), 0.05);
        assert!((r.ma_root_min_modulus - 2.0).abs() < 1e-10 && r.invertible);
        // Vanishing leading coefficient: effective degree one.
        let r = check_stability(&ArmaParams::new(vec![0.5, 0.0], vec![]), 0.0);
        assert!((r.ar_root_min_modulus - 2.0).abs() < 1e-10);
    }

    #[test]
    fn simulate_examples() {
        let t = simulate_with_noise(&ArmaParams::new(vec![0.5], vec![]), &[1.0, 0.0, 0.0]);
        assert!(close(&t.y, &[1.0, 0.5, 0.25], 1e-15));
        let t = simulate_with_noise(&ArmaParams::new(vec![], vec![0.3]), &[1.0, 1.0]);
        assert!(close(&t.y, &[1.0, 1.3], 1e-15));
        let t = simulate_with_noise(&ArmaParams::new(vec![0.4, 0.1], vec![0.2]), &[0.0; 10]);
        assert!(t.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn simulate_is_seeded() {
        let params = ArmaParams::new(vec![0.5], vec![0.3]);
        let noise = NoiseSpec::Uniform { c: 1.0 };
        let a = simulate(&params, &noise, 50, 7).unwrap();
        assert_eq!(a, simulate(&params, &noise, 50, 7).unwrap());
        assert!(simulate(&params, &noise, 0, 7).is_err());
    }

    #[test]
    fn predict_examples() {
        let y = [1.0, -2.0, 0.5, 3.0];
        let ar = ArmaParams::new(vec![0.5, -0.2], vec![]);
        let yhat = predict_sequence(&ar, &y).unwrap();
        assert_eq!(yhat, vec![0.0, 0.5, 0.5 * -2.0 + -0.2 * 1.0, 0.5 * 0.5 + -0.2 * -2.0]);

        let ma = ArmaParams::new(vec![], vec![0.5]);
        assert!(close(&predict_sequence(&ma, &[1.0, 7.0]).unwrap(), &[0.0, 0.5], 1e-15));

        let arma = ArmaParams::new(vec![0.5], vec![0.3]);
        let yhat = predict_sequence(&arma, &[1.0, 0.0]).unwrap();
        assert!((yhat[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn trajectory_predictions() {
        let params = ArmaParams::new(vec![], vec![0.5]);
        let t = Trajectory::from_outputs(vec![1.0, 7.0]).unwrap().with_predictions(&params).unwrap();
        assert!(close(t.yhat.as_ref().unwrap(), &[0.0, 0.5], 1e-15));
        assert!(Trajectory::from_outputs(vec![]).is_err());
    }

    #[test]
    fn nan_input_rejected() {
        let params = ArmaParams::new(vec![0.5], vec![]);
        assert!(matches!(predict_sequence(&params, &[1.0, f64::NAN]), Err(Error::Domain(_))));
    }

    #[test]
    fn residual_examples() {
        let ma = ArmaParams::new(vec![], vec![0.5]);
        assert!(close(&residuals(&ma, &[1.0, 7.0]).unwrap(), &[1.0, 6.5], 1e-15));
        let arma = ArmaParams::new(vec![0.3], vec![0.6]);
        assert!(residuals(&arma, &[0.0; 8]).unwrap().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn residuals_recover_noise_at_truth() {
        let params = ArmaParams::new(vec![0.6, -0.2], vec![0.4, 0.1]);
        let traj = simulate(&params, &NoiseSpec::Uniform { c: 1.0 }, 400, 3).unwrap();
        let e = residuals(&params, &traj.y).unwrap();
        assert!(close(&e, traj.w.as_ref().unwrap(), 1e-10));
    }

    #[test]
    fn ar_gradient_is_lagged_output() {
        let y = [1.0, 2.0, -1.0, 0.5];
        let g = predict_gradients(&ArmaParams::new(vec![0.3], vec![]), &y).unwrap();
        assert_eq!(g.column(0).as_slice(), &[0.0, 1.0, 2.0, -1.0]);
    }

    #[test]
    fn ma_gradient_at_zero() {
        let y = [1.0, 2.0, -1.0, 0.5];
        let g = predict_gradients(&ArmaParams::new(vec![], vec![0.0]), &y).unwrap();
        assert_eq!(g.column(0).as_slice(), &[0.0, 1.0, 2.0, -1.0]);
    }

    #[test]
    fn ar_hessians_vanish() {
        let y = [1.0, 2.0, -1.0, 0.5];
        let h = predict_hessians(&ArmaParams::new(vec![0.3, 0.1], vec![]), &y).unwrap();
        assert!(h.iter().all(|m| m.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn ma1_second_derivative_recursion() {
        // B·∂²Ŷ_t/∂b² = −2 ∂Ŷ_{t−1}/∂b
        let b = 0.4;
        let params = ArmaParams::new(vec![], vec![b]);
        let y: Vec<f64> = (0..30).map(|t| ((t * 7 % 11) as f64 - 5.0) / 5.0).collect();
        let g = predict_gradients(&params, &y).unwrap();
        let h = predict_hessians(&params, &y).unwrap();
        for t in 1..y.len() {
            let lhs = h[t][(0, 0)] + b * h[t - 1][(0, 0)];
            assert!((lhs + 2.0 * g[(t - 1, 0)]).abs() < 1e-12);
        }
        // finite differences of the gradient
        let step = 1e-6;
        let gp = predict_gradients(&ArmaParams::new(vec![], vec![b + step]), &y).unwrap();
        let gm = predict_gradients(&ArmaParams::new(vec![], vec![b - step]), &y).unwrap();
        for t in 0..y.len() {
            let fd = (gp[(t, 0)] - gm[(t, 0)]) / (2.0 * step);
            assert!((fd - h[t][(0, 0)]).abs() < 1e-4);
        }
    }

    #[test]
    fn admissibility_tracks_ma_roots() {
        let m = ArmaModel::new(1, 1);
        assert!(m.is_admissible(&[2.0, 0.9]));
        assert!(!m.is_admissible(&[0.1, 1.0]));
        assert!(!m.is_admissible(&[0.1]));
    }

    proptest! {
        #[test]
        fn prediction_is_causal(
            y in proptest::collection::vec(-2.0f64..2.0, 12),
            cut in 1usize..11,
            bump in -3.0f64..3.0,
        ) {
            let params = ArmaParams::new(vec![0.4, -0.2], vec![0.5, 0.1]);
            let mut y2 = y.clone();
            for v in &mut y2[cut..] { *v += bump; }
            let (a, b) = (predict_sequence(&params, &y).unwrap(), predict_sequence(&params, &y2).unwrap());
            let (ga, gb) = (predict_gradients(&params, &y).unwrap(), predict_gradients(&params, &y2).unwrap());
            let (ha, hb) = (predict_hessians(&params, &y).unwrap(), predict_hessians(&params, &y2).unwrap());
            for t in 0..=cut {
                prop_assert_eq!(a[t], b[t]);
                prop_assert_eq!(ga.row(t), gb.row(t));
                prop_assert_eq!(&ha[t], &hb[t]);
            }
        }

        #[test]
        fn prediction_is_linear_in_outputs(
            y in proptest::collection::vec(-2.0f64..2.0, 20),
            z in proptest::collection::vec(-2.0f64..2.0, 20),
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
        ) {
            let params = ArmaParams::new(vec![0.5], vec![0.3, -0.2]);
            let mix: Vec<f64> = y.iter().zip(&z).map(|(a, b)| alpha * a + beta * b).collect();
            let lhs = predict_sequence(&params, &mix).unwrap();
            let (py, pz) = (predict_sequence(&params, &y).unwrap(), predict_sequence(&params, &z).unwrap());
            for t in 0..20 {
                prop_assert!((lhs[t] - (alpha * py[t] + beta * pz[t])).abs() < 1e-10);
            }
        }

        #[test]
        fn ar_prediction_is_exact_regression(
            y in proptest::collection::vec(-2.0f64..2.0, 15),
            a in proptest::collection::vec(-0.5f64..0.5, 3),
        ) {
            let params = ArmaParams::new(a.clone(), vec![]);
            let yhat = predict_sequence(&params, &y).unwrap();
            for t in 0..y.len() {
                let mut direct = 0.0;
                for (i, ai) in a.iter().enumerate() {
                    if t > i { direct += ai * y[t - i - 1]; }
                }
                prop_assert_eq!(yhat[t], direct);
            }
        }

        #[test]
        fn hessians_are_symmetric(y in proptest::collection::vec(-2.0f64..2.0, 10)) {
            let params = ArmaParams::new(vec![0.3, 0.1], vec![0.4, -0.2]);
            for m in predict_hessians(&params, &y).unwrap() {
                prop_assert_eq!(m.transpose(), m);
            }
        }
    }
}
