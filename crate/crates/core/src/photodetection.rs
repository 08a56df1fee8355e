//! On/off photodetection with finite efficiency and dark counts.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::{binomial, factorial};

use crate::error::{check_nonnegative, check_unit_interval, Error, Result};
use crate::pswf::SpheroidalBasis;
use crate::spectral_modes::SqueezingSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Net efficiency η.
    pub eta: f64,
    /// Per-mode efficiencies ηₖ = η χₖ.
    pub eta_k: Vec<f64>,
    /// Dark count rate n in counts/s.
    pub dark_rate: f64,
    /// Gate duration T in s.
    pub duration_s: f64,
    /// Σₖ νₖ = n T.
    pub nu_total: f64,
}

impl DetectorModel {
    /// Detector seeing modes with energy fractions `chi` inside the gate.
    pub fn new(eta: f64, dark_rate: f64, duration_s: f64, chi: &[f64]) -> Result<Self> {
        check_unit_interval("eta", eta)?;
        check_nonnegative("dark_rate", dark_rate)?;
        if !(duration_s > 0.0) || !duration_s.is_finite() {
            return Err(Error::Domain {
                name: "duration_s",
                value: duration_s,
                expected: "finite and > 0",
            });
        }
        Ok(Self {
            eta,
            eta_k: chi.iter().map(|chi| eta * chi).collect(),
            dark_rate,
            duration_s,
            nu_total: dark_rate * duration_s,
        })
    }

    pub fn single_mode(eta: f64, dark_rate: f64, duration_s: f64) -> Result<Self> {
        Self::new(eta, dark_rate, duration_s, &[1.0])
    }

    pub fn with_dark_rate(&self, dark_rate: f64) -> Result<Self> {
        check_nonnegative("dark_rate", dark_rate)?;
        Ok(Self {
            dark_rate,
            nu_total: dark_rate * self.duration_s,
            ..self.clone()
        })
    }
}

pub fn build_detector(
    eta: f64,
    dark_rate: f64,
    duration_s: f64,
    basis: &SpheroidalBasis,
) -> Result<DetectorModel> {
    DetectorModel::new(eta, dark_rate, duration_s, basis.chi())
}

/// Diagonal of the POVM element for `n` registered counts on Fock states
/// 0..=cutoff: Poissonian dark counts convolved with binomial loss.
pub fn povm_counts(n: usize, eta: f64, nu: f64, cutoff: usize) -> Result<Vec<f64>> {
    check_unit_interval("eta", eta)?;
    check_nonnegative("nu", nu)?;
    let dark = (-nu).exp();
    Ok((0..=cutoff)
        .map(|m| {
            (0..=n.min(m))
                .map(|n_photo| {
                    let n_dark = n - n_photo;
                    dark * nu.powi(n_dark as i32) / factorial(n_dark as u64)
                        * binomial(m as u64, n_photo as u64)
                        * eta.powi(n_photo as i32)
                        * (1.0 - eta).powi((m - n_photo) as i32)
                })
                .sum()
        })
        .collect())
}

/// `(γ₊, γ₋)` for one mode: `γ± = 1 ∓ λ ± (1-τ) η λ`.
pub fn gamma_pm(lambda: f64, eta_k: f64, tau: f64) -> (f64, f64) {
    let shift = (1.0 - tau) * eta_k * lambda;
    (1.0 - lambda + shift, 1.0 + lambda - shift)
}

/// Probability 𝒩(η, ν) that the detector stays off.
pub fn off_probability_factor(spec: &SqueezingSpec, det: &DetectorModel, tau: f64) -> Result<f64> {
    Ok(log_off_probability(spec, det, tau)?.exp())
}

/// ln 𝒩(η, ν), so that P_det = -expm1(ln 𝒩) keeps its relative precision.
pub fn log_off_probability(spec: &SqueezingSpec, det: &DetectorModel, tau: f64) -> Result<f64> {
    check_unit_interval("tau", tau)?;
    let log_product: f64 = spec
        .lambda
        .iter()
        .zip(&det.eta_k)
        .map(|(&lambda, &eta_k)| {
            let (gp, gm) = gamma_pm(lambda, eta_k, tau);
            0.5 * ((1.0 - lambda * lambda) / (gp * gm)).ln()
        })
        .sum();
    Ok(log_product - det.nu_total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_modes::squeezing_spectrum;

    #[test]
    fn vacuum_projector() {
        let w = povm_counts(0, 1.0, 0.0, 5).unwrap();
        assert_eq!(w, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn no_click_diagonal() {
        let (eta, nu) = (0.3, 0.2);
        let w = povm_counts(0, eta, nu, 10).unwrap();
        for (m, v) in w.iter().enumerate() {
            let expected = (-nu).exp() * (1.0 - eta).powi(m as i32);
            assert!((v - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn completeness() {
        let cutoff = 20;
        let mut total = vec![0.0; cutoff + 1];
        for n in 0..=60 {
            for (t, v) in total.iter_mut().zip(povm_counts(n, 0.3, 0.1, cutoff).unwrap()) {
                *t += v;
            }
        }
        assert!(total.iter().all(|t| (t - 1.0).abs() <= 1e-10), "{total:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(povm_counts(0, 0.5, -1.0, 3).is_err());
        assert!(povm_counts(0, 1.5, 0.0, 3).is_err());
        assert!(DetectorModel::single_mode(1.2, 0.0, 1e-7).is_err());
        assert!(DetectorModel::single_mode(0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn dark_counts_from_rate() {
        let det = DetectorModel::new(0.1, 500.0, 5e-8, &[0.46780, 0.03183]).unwrap();
        assert!((det.nu_total - 2.5e-5).abs() < 1e-18);
        assert!((det.eta_k[0] - 0.046780).abs() < 1e-6);
    }

    #[test]
    fn off_factor_limits() {
        let spec = squeezing_spectrum(0.35, 1e7, 1);
        let none = DetectorModel::single_mode(0.0, 0.0, 1e-7).unwrap();
        assert!((off_probability_factor(&spec, &none, 0.9).unwrap() - 1.0).abs() < 1e-15);

        let ideal = DetectorModel::single_mode(1.0, 0.0, 1e-7).unwrap();
        let n0 = off_probability_factor(&spec, &ideal, 0.9).unwrap();
        assert!((n0 - 0.98810).abs() < 2e-4);

        let dark = ideal.with_dark_rate(1e4).unwrap();
        let n1 = off_probability_factor(&spec, &dark, 0.9).unwrap();
        assert!((n1 - n0 * (-dark.nu_total).exp()).abs() <= 1e-16);
    }
}
