//! Dependency matrices of finite-state Markov chains.
//!
//! For a chain the supremum over past and future events collapses to the
//! total-variation distance between the `j`-marginal conditioned on the
//! state at `i` and the unconditional `j`-marginal.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_STATES: usize = 64;
pub const MAX_HORIZON: usize = 512;
const STOCHASTIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DependencyMatrix {
    /// Upper-triangular with unit diagonal; entries lie in `[0, √2]`.
    pub gamma: DMatrix<f64>,
    pub spectral_norm: f64,
}

fn validate_chain(p: &DMatrix<f64>, initial: &[f64]) -> Result<()> {
    let n = p.nrows();
    if n == 0 || p.ncols() != n {
        return Err(Error::domain("transition matrix must be square and non-empty"));
    }
    if n > MAX_STATES {
        return Err(Error::Resource(format!("{n} states exceeds the limit of {MAX_STATES}")));
    }
    if initial.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: initial.len() });
    }
    for (i, row) in p.row_iter().enumerate() {
        if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain(format!("row {i} has a negative or non-finite entry")));
        }
        if (row.sum() - 1.0).abs() > STOCHASTIC_TOLERANCE {
            return Err(Error::domain(format!("row {i} sums to {}", row.sum())));
        }
    }
    if initial.iter().any(|v| !(v.is_finite() && *v >= 0.0))
        || (initial.iter().sum::<f64>() - 1.0).abs() > STOCHASTIC_TOLERANCE
    {
        return Err(Error::domain("initial law is not a probability vector"));
    }
    Ok(())
}

/// `Γ_ij = √(2 max_{z: μ_i(z) > 0} TV(P^{j−i}(z, ·), μ_j))` for `i < j`.
///
/// The conditional and unconditional laws differ by
/// `Σ_{z'} μ_i(z') (P^k(z, ·) − P^k(z', ·))`; the rows `P^k(z, ·) − P^k(0, ·)`
/// are propagated directly so that fast-mixing chains keep full relative
/// accuracy instead of cancelling two nearly equal distributions.
pub fn dependency_matrix_markov(p: &DMatrix<f64>, initial: &[f64], horizon: usize) -> Result<DependencyMatrix> {
    validate_chain(p, initial)?;
    if horizon == 0 {
        return Err(Error::domain("horizon must be positive"));
    }
    if horizon > MAX_HORIZON {
        return Err(Error::Resource(format!("horizon {horizon} exceeds the limit of {MAX_HORIZON}")));
    }
    let n = p.nrows();

    let mut marginals = Vec::with_capacity(horizon);
    let mut mu = DVector::from_column_slice(initial).transpose();
    for _ in 0..horizon {
        marginals.push(mu.clone());
        mu = &mu * p;
    }

    // diffs[k] row z = P^k(z, ·) − P^k(0, ·)
    let mut diffs = Vec::with_capacity(horizon);
    let mut e = DMatrix::<f64>::identity(n, n);
    for z in 0..n {
        e[(z, 0)] -= 1.0;
    }
    for _ in 0..horizon {
        diffs.push(e.clone());
        e = &e * p;
    }

    let mut gamma = DMatrix::<f64>::identity(horizon, horizon);
    for i in 0..horizon {
        let mu_i = &marginals[i];
        for j in i + 1..horizon {
            let ek = &diffs[j - i];
            let w = mu_i * ek;
            let mut worst = 0.0f64;
            for z in 0..n {
                if mu_i[z] <= 0.0 {
                    continue;
                }
                let tv = 0.5 * ek.row(z).iter().zip(w.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>();
                worst = worst.max(tv);
            }
            gamma[(i, j)] = (2.0 * worst.min(1.0)).sqrt();
        }
    }
    let spectral_norm = gamma.singular_values().max();
    Ok(DependencyMatrix { gamma, spectral_norm })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependencyGrowth {
    pub b1: f64,
    pub b2: f64,
    /// `(T, ‖Γ(T)‖)` for each grid point.
    pub norms: Vec<(usize, f64)>,
}

/// Fits `‖Γ(T)‖² ≤ b1 T^{b2}` on a horizon grid.
pub fn fit_dependency_growth(p: &DMatrix<f64>, initial: &[f64], grid: &[usize]) -> Result<DependencyGrowth> {
    if grid.len() < 3 || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(Error::domain("grid needs at least three strictly ascending positive horizons"));
    }
    let norms: Vec<(usize, f64)> = grid
        .iter()
        .map(|&t| Ok((t, dependency_matrix_markov(p, initial, t)?.spectral_norm)))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = norms.iter().map(|(t, _)| (*t as f64).ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|(_, g)| (g * g).ln()).collect();
    let slope = ols(&xs, &ys).0;
    let b2 = slope.clamp(0.0, 1.0 - 1e-12);
    let b1 = norms
        .iter()
        .map(|(t, g)| g * g / (*t as f64).powf(b2))
        .fold(0.0, f64::max);
    Ok(DependencyGrowth { b1, b2, norms })
}

/// Least-squares `(slope, intercept, r²)`.
pub(crate) fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(rho: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0 - rho, rho, rho, 1.0 - rho])
    }

    #[test]
    fn iid_chain_is_identity() {
        let p = DMatrix::from_row_slice(3, 3, &[0.2, 0.5, 0.3, 0.2, 0.5, 0.3, 0.2, 0.5, 0.3]);
        let d = dependency_matrix_markov(&p, &[1.0, 0.0, 0.0], 20).unwrap();
        assert_eq!(d.gamma, DMatrix::identity(20, 20));
        assert_eq!(d.spectral_norm, 1.0);
    }

    #[test]
    fn two_state_matches_analytic() {
        let rho = 0.3;
        let d = dependency_matrix_markov(&two_state(rho), &[0.5, 0.5], 64).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                let expected = match j.cmp(&i) {
                    std::cmp::Ordering::Less => 0.0,
                    std::cmp::Ordering::Equal => 1.0,
                    std::cmp::Ordering::Greater => (1.0f64 - 2.0 * rho).abs().powf((j - i) as f64 / 2.0),
                };
                assert!((d.gamma[(i, j)] - expected).abs() <= 1e-10, "({i},{j})");
            }
        }
        assert!(d.spectral_norm >= 1.0);
    }

    #[test]
    fn one_step_mixing_is_identity() {
        let d = dependency_matrix_markov(&two_state(0.5), &[0.5, 0.5], 16).unwrap();
        assert_eq!(d.gamma, DMatrix::identity(16, 16));
    }

    #[test]
    fn entries_in_range() {
        let p = DMatrix::from_row_slice(3, 3, &[0.9, 0.1, 0.0, 0.0, 0.8, 0.2, 0.3, 0.0, 0.7]);
        let d = dependency_matrix_markov(&p, &[1.0, 0.0, 0.0], 30).unwrap();
        for i in 0..30 {
            assert_eq!(d.gamma[(i, i)], 1.0);
            for j in 0..30 {
                let v = d.gamma[(i, j)];
                assert!((0.0..=2f64.sqrt()).contains(&v));
                if j < i {
                    assert_eq!(v, 0.0);
                }
            }
        }
        assert!(d.spectral_norm >= 1.0);
    }

    #[test]
    fn growth_fits() {
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let g = fit_dependency_growth(&p, &[0.5, 0.5], &[4, 8, 16]).unwrap();
        assert_eq!((g.b1, g.b2), (1.0, 0.0));

        // The norm converges to 1/(1 − √0.4) like 1/T, so the fitted
        // exponent shrinks as the grid moves out.
        let early = fit_dependency_growth(&two_state(0.3), &[0.5, 0.5], &[16, 32, 64, 128]).unwrap();
        let late = fit_dependency_growth(&two_state(0.3), &[0.5, 0.5], &[64, 128, 256, 512]).unwrap();
        assert!(late.b2.abs() < 0.05, "{late:?}");
        assert!(late.b2 < early.b2);
        let limit = 1.0 / (1.0 - 0.4f64.sqrt());
        for g in [&early, &late] {
            for (t, n) in &g.norms {
                assert!(*n < limit);
                assert!(n * n <= g.b1 * (*t as f64).powf(g.b2) + 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.5, 0.5]);
        assert!(dependency_matrix_markov(&bad, &[0.5, 0.5], 4).is_err());
        assert!(dependency_matrix_markov(&two_state(0.1), &[0.5, 0.5], 513).is_err());
        assert!(fit_dependency_growth(&two_state(0.1), &[0.5, 0.5], &[4, 8]).is_err());
        assert!(fit_dependency_growth(&two_state(0.1), &[0.5, 0.5], &[8, 4, 16]).is_err());
    }

    #[test]
    fn ols_exact_line() {
        let (s, i, r2) = ols(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-15 && (i - 1.0).abs() < 1e-15 && (r2 - 1.0).abs() < 1e-15);
    }
}
