//! Fabrication-noise model for silicon photonic circuits.
//!
//! Directional couplers get Gaussian reflectivities, swaps are treated as
//! slightly better couplers with rectified-Gaussian reflectivities around a
//! small mean, and thermo-optic phase shifters pick up a rectified-Gaussian
//! absorptivity. Phases themselves are not perturbed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Element};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    pub bs_mean: f64,
    pub bs_std: f64,
    pub swap_mean: f64,
    pub swap_std: f64,
    pub loss_mean: f64,
    pub loss_std: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { bs_mean: 0.5, bs_std: 0.04, swap_mean: 0.02, swap_std: 0.02, loss_mean: 0.05, loss_std: 0.025 }
    }
}

impl NoiseParams {
    /// Degenerate distributions: every realization equals the ideal circuit.
    pub fn ideal() -> Self {
        NoiseParams { bs_mean: 0.5, bs_std: 0.0, swap_mean: 0.0, swap_std: 0.0, loss_mean: 0.0, loss_std: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("bs_mean", self.bs_mean, true),
            ("bs_std", self.bs_std, false),
            ("swap_mean", self.swap_mean, true),
            ("swap_std", self.swap_std, false),
            ("loss_mean", self.loss_mean, true),
            ("loss_std", self.loss_std, false),
        ];
        for (name, value, is_mean) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidNoise(format!("{name} must be finite, got {value}")));
            }
            if is_mean && !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidNoise(format!("{name} must lie in [0, 1], got {value}")));
            }
            if !is_mean && value < 0.0 {
                return Err(Error::InvalidNoise(format!("{name} must be non-negative, got {value}")));
            }
        }
        Ok(())
    }
}

/// Per-trial random stream: a ChaCha stream selected by the trial index
/// under the master seed, so trial `k` sees the same numbers no matter which
/// worker runs it or in what order.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

fn gaussian<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + std * z
}

/// `max(0, X)` for `X ~ N(mean, std²)`.
pub fn rectified_gaussian<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    gaussian(mean, std, rng).max(0.0)
}

/// A freshly fabricated copy of `c`: same layers, kinds and modes, with one
/// independent draw per element.
pub fn realize<R: Rng + ?Sized>(c: &Circuit, p: &NoiseParams, rng: &mut R) -> Result<Circuit> {
    p.validate()?;
    Ok(realize_unchecked(c, p, rng))
}

pub(crate) fn realize_unchecked<R: Rng + ?Sized>(c: &Circuit, p: &NoiseParams, rng: &mut R) -> Circuit {
    c.map_elements(|e| match *e {
        Element::BeamSplitter { upper, lower, .. } => {
            Element::BeamSplitter { upper, lower, reflectivity: gaussian(p.bs_mean, p.bs_std, rng).clamp(0.0, 1.0) }
        }
        Element::Swap { upper, lower, .. } => {
            Element::Swap { upper, lower, reflectivity: rectified_gaussian(p.swap_mean, p.swap_std, rng).min(1.0) }
        }
        Element::PhaseShifter { mode, phase, .. } => {
            Element::PhaseShifter { mode, phase, loss: rectified_gaussian(p.loss_mean, p.loss_std, rng).min(1.0) }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::circuit_matrix;
    use crate::generators::{grover_search, qft};

    /// `E[max(0, X)] = μΦ(μ/σ) + σφ(μ/σ)`.
    fn rectified_mean(mu: f64, sigma: f64) -> f64 {
        let t = mu / sigma;
        let pdf = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let cdf = 0.5 * (1.0 + erf(t / std::f64::consts::SQRT_2));
        mu * cdf + sigma * pdf
    }

    // Simpson quadrature of the erf integrand.
    fn erf(x: f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let f = |t: f64| (-t * t).exp();
        let mut sum = f(0.0) + f(x);
        for k in 1..n {
            sum += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * h / 3.0 * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn defaults_match_fabrication_model() {
        let p = NoiseParams::default();
        assert_eq!((p.bs_mean, p.bs_std), (0.5, 0.04));
        assert_eq!((p.swap_mean, p.swap_std), (0.02, 0.02));
        assert_eq!((p.loss_mean, p.loss_std), (0.05, 0.025));
        assert!(p.validate().is_ok());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let bad = NoiseParams { bs_std: -0.1, ..NoiseParams::default() };
        assert!(matches!(bad.validate(), Err(Error::InvalidNoise(_))));
        let bad = NoiseParams { loss_mean: 1.5, ..NoiseParams::default() };
        assert!(bad.validate().is_err());
        let bad = NoiseParams { swap_mean: f64::NAN, ..NoiseParams::default() };
        assert!(bad.validate().is_err());
        let mut rng = trial_rng(1, 0);
        assert!(realize(&qft(4).unwrap(), &NoiseParams { bs_std: -1.0, ..NoiseParams::ideal() }, &mut rng).is_err());
    }

    #[test]
    fn degenerate_params_reproduce_ideal_circuit() {
        let c = grover_search(8, 3).unwrap();
        let mut rng = trial_rng(9, 4);
        assert_eq!(realize(&c, &NoiseParams::ideal(), &mut rng).unwrap(), c);
    }

    #[test]
    fn rectified_gaussian_edge_cases() {
        let mut rng = trial_rng(0, 0);
        assert_eq!(rectified_gaussian(0.3, 0.0, &mut rng), 0.3);
        assert_eq!(rectified_gaussian(-1.0, 0.0, &mut rng), 0.0);
    }

    #[test]
    fn beam_splitter_reflectivity_mean() {
        let c = qft(4).unwrap();
        let p = NoiseParams::default();
        let mut rng = trial_rng(11, 0);
        let mut draws = Vec::new();
        while draws.len() < 100_000 {
            for e in realize(&c, &p, &mut rng).unwrap().elements() {
                if let Element::BeamSplitter { reflectivity, .. } = e {
                    draws.push(*reflectivity);
                }
            }
        }
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.5).abs() < 0.001, "{mean}");
    }

    #[test]
    fn loss_mean_shows_rectification_bias() {
        let expected = rectified_mean(0.05, 0.025);
        assert!((expected - 0.05021).abs() < 1e-5, "{expected}");
        let mut rng = trial_rng(5, 1);
        let n = 200_000;
        let mean = (0..n).map(|_| rectified_gaussian(0.05, 0.025, &mut rng)).sum::<f64>() / n as f64;
        // standard error ≈ 0.024/√n ≈ 5.4e-5
        assert!((mean - expected).abs() < 3e-4, "{mean} vs {expected}");
        assert!(mean > 0.05);
    }

    #[test]
    fn zero_mass_of_swap_distribution() {
        let mut rng = trial_rng(3, 2);
        let n = 100_000;
        let zeros = (0..n).filter(|_| rectified_gaussian(0.02, 0.02, &mut rng) == 0.0).count();
        let frac = zeros as f64 / n as f64;
        assert!((frac - 0.1587).abs() < 0.005, "{frac}");
    }

    #[test]
    fn structure_is_preserved_and_losses_never_amplify() {
        let c = grover_search(8, 5).unwrap();
        let mut rng = trial_rng(21, 0);
        for _ in 0..20 {
            let r = realize(&c, &NoiseParams::default(), &mut rng).unwrap();
            assert_eq!(r.layers().len(), c.layers().len());
            for (a, b) in r.layers().iter().zip(c.layers()) {
                assert_eq!(a.len(), b.len());
                for (x, y) in a.elements().iter().zip(b.elements()) {
                    assert_eq!(x.modes(), y.modes());
                    assert_eq!(std::mem::discriminant(x), std::mem::discriminant(y));
                }
            }
            let m = circuit_matrix(&r);
            let sv = m.singular_values();
            assert!(sv.iter().all(|s| *s <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn trial_streams_are_reproducible_and_distinct() {
        let c = qft(8).unwrap();
        let p = NoiseParams::default();
        let a = realize(&c, &p, &mut trial_rng(42, 17)).unwrap();
        let b = realize(&c, &p, &mut trial_rng(42, 17)).unwrap();
        let other = realize(&c, &p, &mut trial_rng(42, 18)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }
}
