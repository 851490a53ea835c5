//! The compact parameter class: a Euclidean ball of radius `radius` in
//! `dimension` coordinates, with projection, lattice ε-nets and the
//! covering-number bounds used by the rate analysis.

use crate::error::{check_len, Error, Result};

/// Default upper limit on the number of points an ε-net may contain.
pub const DEFAULT_NET_CAP: usize = 10_000_000;

/// Closed ball `{θ : ‖θ‖₂ ≤ radius}` in `ℝ^dimension`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterClass {
    dimension: usize,
    radius: f64,
}

impl ParameterClass {
    pub fn new(dimension: usize, radius: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::domain("parameter dimension must be at least 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!(
                "parameter radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { dimension, radius })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dimension && norm(theta) <= self.radius
    }

    pub fn project(&self, theta: &[f64]) -> Result<Vec<f64>> {
        project(theta, self)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean projection onto the ball: radial scaling when outside.
pub fn project(theta: &[f64], class: &ParameterClass) -> Result<Vec<f64>> {
    check_len(class.dimension, theta.len())?;
    let n = norm(theta);
    if n <= class.radius {
        return Ok(theta.to_vec());
    }
    if !n.is_finite() {
        return Err(Error::domain("cannot project a non-finite parameter vector"));
    }
    let mut scale = class.radius / n;
    let mut out: Vec<f64> = theta.iter().map(|x| x * scale).collect();
    // Rounding can leave the scaled point a hair outside the ball.
    while norm(&out) > class.radius {
        scale *= 1.0 - f64::EPSILON;
        out = theta.iter().map(|x| x * scale).collect();
    }
    Ok(out)
}

/// Upper bound `(3·radius/ε)^d` on the covering number of the class,
/// valid for `ε ∈ (0, radius]`.
pub fn covering_number_bound(epsilon: f64, class: &ParameterClass) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= class.radius) {
        return Err(Error::domain(format!(
            "covering bound requires 0 < ε ≤ {}, got {epsilon}",
            class.radius
        )));
    }
    Ok((3.0 * class.radius / epsilon).powi(class.dimension as i32))
}

/// Covering bound `(3·L1·radius/ε)^d` for the sup-norm class of shifted
/// predictor sequences, valid for `ε ∈ (0, L1·radius]`.
pub fn function_class_covering_bound(
    epsilon: f64,
    class: &ParameterClass,
    gradient_bound: f64,
) -> Result<f64> {
    if !(gradient_bound > 0.0) {
        return Err(Error::domain("gradient bound L1 must be positive"));
    }
    let scale = gradient_bound * class.radius;
    if !(epsilon > 0.0 && epsilon <= scale) {
        return Err(Error::domain(format!(
            "function-class covering bound requires 0 < ε ≤ L1·B = {scale}, got {epsilon}"
        )));
    }
    Ok((3.0 * scale / epsilon).powi(class.dimension as i32))
}

/// Builds an ε-net of the class from a cubic lattice of pitch `2ε/√d`.
///
/// Every lattice point within `radius + ε` of the origin is projected onto
/// the ball. Projection is 1-Lipschitz and fixes the ball, so each point of
/// the class stays within ε of the projection of its nearest lattice point.
pub fn build_epsilon_net(class: &ParameterClass, epsilon: f64) -> Result<Vec<Vec<f64>>> {
    build_epsilon_net_capped(class, epsilon, DEFAULT_NET_CAP)
}

pub fn build_epsilon_net_capped(
    class: &ParameterClass,
    epsilon: f64,
    cap: usize,
) -> Result<Vec<Vec<f64>>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("net resolution must be positive, got {epsilon}")));
    }
    let d = class.dimension;
    let pitch = 2.0 * epsilon / (d as f64).sqrt();
    let reach = class.radius + epsilon;
    let half = (reach / pitch).ceil() as i64;
    let side = (2 * half + 1) as f64;
    let candidates = side.powi(d as i32);
    if candidates > 64.0 * cap as f64 {
        return Err(Error::Resource(format!(
            "lattice would enumerate {candidates:.3e} candidates for a net capped at {cap}"
        )));
    }

    let mut net: Vec<Vec<f64>> = Vec::new();
    let mut index = vec![-half; d];
    let mut point = vec![0.0; d];
    loop {
        for (p, &k) in point.iter_mut().zip(&index) {
            *p = k as f64 * pitch;
        }
        if norm(&point) <= reach {
            net.push(project(&point, class)?);
            if net.len() > cap {
                return Err(Error::Resource(format!("ε-net exceeds cap of {cap} points")));
            }
        }
        // odometer increment
        let mut axis = 0;
        while axis < d {
            index[axis] += 1;
            if index[axis] <= half {
                break;
            }
            index[axis] = -half;
            axis += 1;
        }
        if axis == d {
            break;
        }
    }

    net.push(vec![0.0; d]);
    net.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    net.dedup();
    Ok(net)
}

/// Distance from `theta` to the closest point of `net`.
pub fn nearest_distance(net: &[Vec<f64>], theta: &[f64]) -> f64 {
    net.iter()
        .map(|p| distance(p, theta))
        .fold(f64::INFINITY, f64::min)
}
