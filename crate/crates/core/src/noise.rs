//! Bounded, symmetric, i.i.d. noise families and their sub-Gaussian
//! parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    /// Uniform on `[-c, c]`.
    Uniform { c: f64 },
    /// `±c` with equal probability.
    Rademacher { c: f64 },
    /// Centered Gaussian with scale `sigma` conditioned on `[-c, c]`.
    TruncatedGaussian { sigma: f64, c: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let (c, sigma) = match *self {
            NoiseSpec::Uniform { c } | NoiseSpec::Rademacher { c } => (c, 1.0),
            NoiseSpec::TruncatedGaussian { sigma, c } => (c, sigma),
        };
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("noise bound c must be positive, got {c}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("noise scale must be positive, got {sigma}")));
        }
        Ok(())
    }

    pub fn bound(&self) -> f64 {
        match *self {
            NoiseSpec::Uniform { c }
            | NoiseSpec::Rademacher { c }
            | NoiseSpec::TruncatedGaussian { c, .. } => c,
        }
    }

    /// Returns the same family with support and scale multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        match *self {
            NoiseSpec::Uniform { c } => NoiseSpec::Uniform { c: c * s },
            NoiseSpec::Rademacher { c } => NoiseSpec::Rademacher { c: c * s },
            NoiseSpec::TruncatedGaussian { sigma, c } => NoiseSpec::TruncatedGaussian {
                sigma: sigma * s,
                c: c * s,
            },
        }
    }

    pub(crate) fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseSpec::Uniform { c } => rng.random_range(-c..=c),
            NoiseSpec::Rademacher { c } => {
                if rng.random::<bool>() {
                    c
                } else {
                    -c
                }
            }
            NoiseSpec::TruncatedGaussian { sigma, c } => loop {
                let z: f64 = rng.sample(StandardNormal);
                let w = sigma * z;
                if w.abs() <= c {
                    break w;
                }
            },
        }
    }
}

/// Draws `len` i.i.d. samples; identical output for identical `(spec, len, seed)`.
pub fn sample_noise(spec: &NoiseSpec, len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| spec.draw(&mut rng)).collect()
}

/// A valid sub-Gaussian parameter σ_w for the family.
///
/// Any zero-mean variable supported on `[-c, c]` is `c`-sub-Gaussian by
/// Hoeffding's lemma; that value is returned for every family, including the
/// truncated Gaussian where `min(σ, c)` is not valid in general.
pub fn sub_gaussian_sigma(spec: &NoiseSpec) -> f64 {
    spec.bound()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn rademacher_support() {
        for seed in 0..20 {
            let w = sample_noise(&NoiseSpec::Rademacher { c: 1.0 }, 4, seed);
            assert!(w.iter().all(|&x| x == 1.0 || x == -1.0));
        }
    }

    #[test]
    fn uniform_variance() {
        let c = 1.7;
        let w = sample_noise(&NoiseSpec::Uniform { c }, 100_000, 11);
        assert!(w.iter().all(|x| x.abs() <= c));
        let (mean, var) = moments(&w);
        assert!(mean.abs() < 0.02);
        assert!((var / (c * c / 3.0) - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn wide_truncated_gaussian_variance() {
        let w = sample_noise(&NoiseSpec::TruncatedGaussian { sigma: 1.0, c: 10.0 }, 100_000, 5);
        let (_, var) = moments(&w);
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn narrow_truncation_respects_support() {
        let w = sample_noise(&NoiseSpec::TruncatedGaussian { sigma: 2.0, c: 0.5 }, 10_000, 9);
        assert!(w.iter().all(|x| x.abs() <= 0.5));
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sub_gaussian_sigma(&NoiseSpec::Rademacher { c: 1.0 }), 1.0);
        assert_eq!(sub_gaussian_sigma(&NoiseSpec::Uniform { c: 2.0 }), 2.0);
        assert_eq!(
            sub_gaussian_sigma(&NoiseSpec::TruncatedGaussian { sigma: 0.3, c: 1.5 }),
            1.5
        );
    }

    #[test]
    fn determinism() {
        let spec = NoiseSpec::Uniform { c: 1.0 };
        assert_eq!(sample_noise(&spec, 64, 3), sample_noise(&spec, 64, 3));
        assert_ne!(sample_noise(&spec, 64, 3), sample_noise(&spec, 64, 4));
    }

    #[test]
    fn odd_moments_vanish() {
        for spec in [
            NoiseSpec::Uniform { c: 1.0 },
            NoiseSpec::Rademacher { c: 1.0 },
            NoiseSpec::TruncatedGaussian { sigma: 1.0, c: 1.5 },
        ] {
            let w = sample_noise(&spec, 100_000, 21);
            let n = w.len() as f64;
            for k in [1, 3] {
                let m: Vec<f64> = w.iter().map(|x| x.powi(k)).collect();
                let (mean, var) = moments(&m);
                let se = (var / n).sqrt();
                assert!(mean.abs() <= 4.0 * se + 1e-12, "{spec:?} moment {k}: {mean} (se {se})");
            }
        }
    }

    #[test]
    fn mgf_dominated_by_sub_gaussian_envelope() {
        for spec in [
            NoiseSpec::Uniform { c: 1.0 },
            NoiseSpec::Rademacher { c: 1.0 },
            NoiseSpec::TruncatedGaussian { sigma: 1.0, c: 2.0 },
            NoiseSpec::Uniform { c: 0.5 },
        ] {
            let sigma = sub_gaussian_sigma(&spec);
            let w = sample_noise(&spec, 50_000, 77);
            let n = w.len() as f64;
            for step in -10..=10 {
                let lambda = step as f64 * 0.5;
                let e: Vec<f64> = w.iter().map(|x| (lambda * x).exp()).collect();
                let (mean, var) = moments(&e);
                let se = (var / n).sqrt();
                let envelope = (lambda * lambda * sigma * sigma / 2.0).exp();
                assert!(
                    mean / envelope <= 1.0 + 3.0 * se / envelope,
                    "{spec:?} λ={lambda}: {mean} vs {envelope}"
                );
            }
        }
    }

    #[test]
    fn validation() {
        assert!(NoiseSpec::Uniform { c: 0.0 }.validate().is_err());
        assert!(NoiseSpec::TruncatedGaussian { sigma: -1.0, c: 1.0 }.validate().is_err());
        assert!(NoiseSpec::Rademacher { c: 2.0 }.validate().is_ok());
    }
}
