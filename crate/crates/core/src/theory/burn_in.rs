//! Burn-in times, the prediction-error envelope and the parameter-error
//! bound, evaluated with natural logarithms.

use crate::error::{Error, Result};

/// Universal constant of the linearized-offset bound.
pub const DEFAULT_RATE_CONSTANT: f64 = 653.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSet {
    pub d_theta: usize,
    pub sigma_w: f64,
    pub b_theta: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub a: f64,
    pub lambda0: f64,
    pub b1: f64,
    pub b2: f64,
    pub gamma: f64,
}

impl ConstantSet {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sigma_w", self.sigma_w),
            ("b_theta", self.b_theta),
            ("l1", self.l1),
            ("a", self.a),
            ("lambda0", self.lambda0),
            ("b1", self.b1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("l2", self.l2), ("l3", self.l3)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.d_theta == 0 {
            return Err(Error::domain("d_theta must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.b2) {
            return Err(Error::domain(format!("b2 must lie in [0, 1), got {}", self.b2)));
        }
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(Error::domain(format!("gamma must lie in (0, 1/2), got {}", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurnInReport {
    pub t1: f64,
    pub t21: f64,
    pub t22: f64,
    pub t23: f64,
    pub t2: f64,
    pub t3: f64,
    pub t0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    /// Terms whose logarithmic factor was nonpositive (or undefined) and
    /// which were therefore floored at 1.
    pub floored: Vec<&'static str>,
}

struct Terms {
    floored: Vec<&'static str>,
}

impl Terms {
    /// `base^exponent`, or 1 (flagged) when `base` is not positive.
    fn power(&mut self, name: &'static str, base: f64, exponent: f64) -> f64 {
        if base > 0.0 {
            base.powf(exponent)
        } else {
            self.floored.push(name);
            1.0
        }
    }
}

/// Evaluates T1, T21, T22, T23, T2, T3, C1–C5 and T0 = max{T1, T2, T3}.
pub fn burn_in_times(k: &ConstantSet) -> Result<BurnInReport> {
    k.validate()?;
    let mut terms = Terms { floored: Vec::new() };
    let d = k.d_theta as f64;
    let sw = k.sigma_w;
    let one_minus_b2 = 1.0 - k.b2;
    let dep_exp = 1.0 / one_minus_b2;
    let l1sq = k.l1 * k.l1;

    let core1 = d * k.b1 * l1sq * l1sq * k.a * k.a;
    let t1a = terms.power("t1_a", 32.0 * core1 * (8.0 * 8f64.sqrt()).ln(), dep_exp);
    let t1b = terms.power(
        "t1_b",
        (64.0 * core1 / one_minus_b2) * (128.0 * core1 / one_minus_b2).ln(),
        dep_exp,
    );
    let t1 = t1a.max(t1b);

    let sqrt_l0 = k.lambda0.sqrt();
    let t21 = terms.power(
        "t21",
        (24.0 * d * k.b1 * l1sq / k.lambda0) * (6.0 * k.l1 / sqrt_l0).ln(),
        dep_exp,
    );
    let t22 = terms.power(
        "t22",
        (16.0 * d * k.b1 * l1sq / k.lambda0) * (15.0 * k.l1 / sqrt_l0).ln(),
        dep_exp,
    );
    let r23 = k.b1 * l1sq / (k.lambda0 * one_minus_b2);
    let t23a = terms.power("t23_a", 192.0 * r23 * (384.0 * r23).ln(), dep_exp);
    let t23b = terms.power(
        "t23_b",
        48.0 * k.b1 * l1sq * (96.0 * (sw * sw * d + 2.0 * sw * k.l1 * k.b_theta)).ln() / k.lambda0,
        dep_exp,
    );
    let t23 = t23a.max(t23b);
    let t2 = t21.max(t22).max(t23);

    let bt = k.b_theta;
    let c1 = 16.0 * (d * sw * sw + 4.0 * sw * sw + 10.0 * sw * k.l1 * bt + l1sq * bt * bt);
    let radius_sq = 8.0 * k.a * c1 + 2.0 * k.a * l1sq * bt * bt;
    let c2 = radius_sq * (8.0 * sw * k.l3 * radius_sq.sqrt() + 18.0 * d.sqrt() * sw * k.l2);
    let c3 = 4.0 * bt * bt
        * (2.0 * d * sw * sw * (16.0 * k.l3 * k.l3 * bt * bt + 176.0 * k.l2 * k.l2)).sqrt();
    let c4 = k.l2 * k.l2 * (radius_sq * radius_sq + 16.0 * bt.powi(4));
    let c5 = 2.0 * (c2 + c3).max(c4);

    let shrink = 1.0 - 2.0 * k.gamma;
    let rate_exp = 3.0 / shrink;
    let c5_23 = c5.powf(2.0 / 3.0);
    let t3a = terms.power("t3_a", c5_23 * 3f64.ln(), rate_exp);
    let t3b = terms.power(
        "t3_b",
        (6.0 * c5_23 / shrink) * (12.0 * c5_23 / shrink).ln(),
        rate_exp,
    );
    let t3 = t3a.max(t3b);

    Ok(BurnInReport {
        t1,
        t21,
        t22,
        t23,
        t2,
        t3,
        t0: t1.max(t2).max(t3),
        c1,
        c2,
        c3,
        c4,
        c5,
        floored: terms.floored,
    })
}

/// `c·d·σ_w²/T + (2 L1² B_θ² + 16)/T^{1+γ}`.
pub fn prediction_error_envelope(
    d_theta: usize,
    sigma_w: f64,
    b_theta: f64,
    l1: f64,
    gamma: f64,
    horizon: usize,
    c: f64,
) -> f64 {
    let t = horizon as f64;
    let b = 2.0 * l1 * l1 * b_theta * b_theta + 16.0;
    c * d_theta as f64 * sigma_w * sigma_w / t + b / t.powf(1.0 + gamma)
}

pub fn theorem1_bound(k: &ConstantSet, horizon: usize, c: f64) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::domain("horizon must be positive"));
    }
    Ok(prediction_error_envelope(k.d_theta, k.sigma_w, k.b_theta, k.l1, k.gamma, horizon, c))
}

/// `8a·max(M_T(θ̂), 0) + 2a L1² B_θ² / T`.
pub fn parameter_error_bound(a: f64, offset_hat: f64, l1: f64, b_theta: f64, horizon: usize) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain("identifiability constant a must be positive"));
    }
    if horizon == 0 {
        return Err(Error::domain("horizon must be positive"));
    }
    Ok(8.0 * a * offset_hat.max(0.0) + 2.0 * a * l1 * l1 * b_theta * b_theta / horizon as f64)
}
