//! Flat-band squeezing in the spheroidal modes and the weights with which
//! each mode enters the quadrature seen by the homodyne detector.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::pswf::{ModePoint, SpheroidalBasis};
use crate::quadrature::{bisect, sine_integral, sinc};

/// Tail mass below which further modes are ignored when sizing weight vectors.
pub const WEIGHT_TAIL_TOLERANCE: f64 = 1e-10;

/// Default cap on the number of weighted modes.
pub const DEFAULT_KMAX_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSpec {
    pub gamma: f64,
    pub bandwidth_hz: f64,
    /// rₖ = (-1)ᵏ γ
    pub r: Vec<f64>,
    /// λₖ = tanh rₖ
    pub lambda: Vec<f64>,
}

pub fn squeezing_spectrum(gamma: f64, bandwidth_hz: f64, k_max: usize) -> SqueezingSpec {
    let r: Vec<f64> = (0..k_max)
        .map(|k| if k % 2 == 0 { gamma } else { -gamma })
        .collect();
    let lambda = r.iter().map(|r| r.tanh()).collect();
    SqueezingSpec {
        gamma,
        bandwidth_hz,
        r,
        lambda,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// CW local oscillator, unfiltered current integrated over the gate.
    CwWideband,
    /// CW local oscillator, current low-pass filtered to the squeezing band.
    CwFiltered,
    /// Transform-limited pulses, peak of the electrical pulse sampled.
    Pulsed,
    /// One squeezed mode, perfectly matched.
    SingleMode,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::CwWideband,
        Scheme::CwFiltered,
        Scheme::Pulsed,
        Scheme::SingleMode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::CwWideband => "cw_wideband",
            Scheme::CwFiltered => "cw_filtered",
            Scheme::Pulsed => "pulsed",
            Scheme::SingleMode => "single_mode",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scheme '{s}' (expected cw_wideband, cw_filtered, pulsed or single_mode)"))
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Weights of the LO-matched quadrature on the squeezed modes (`ws`) and on
/// the out-of-band vacuum modes (`wv`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeWeights {
    pub scheme: Scheme,
    pub ws: Vec<f64>,
    pub wv: Vec<f64>,
}

impl SchemeWeights {
    pub fn single_mode() -> Self {
        Self {
            scheme: Scheme::SingleMode,
            ws: vec![1.0],
            wv: Vec::new(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.ws.iter().chain(&self.wv).map(|w| w * w).sum()
    }

    pub fn mode_count(&self) -> usize {
        self.ws.len()
    }
}

/// Φₖ(c, 0)·√B, the LO overlap of mode k up to a common factor.
fn lo_overlap(basis: &SpheroidalBasis) -> Vec<f64> {
    basis
        .s_at_zero
        .iter()
        .enumerate()
        .map(|(k, s0)| ((2 * k + 1) as f64).sqrt() * s0)
        .collect()
}

fn normalized(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateBasis);
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

pub fn weights_cw_wideband(basis: &SpheroidalBasis) -> Result<SchemeWeights> {
    let alpha = lo_overlap(basis);
    let norm_sq: f64 = alpha.iter().zip(&basis.chi).map(|(a, chi)| a * a * chi).sum();
    if !(norm_sq > 0.0) {
        return Err(Error::DegenerateBasis);
    }
    let norm = norm_sq.sqrt();
    let ws = alpha.iter().zip(&basis.chi).map(|(a, chi)| a * chi / norm).collect();
    let wv = alpha
        .iter()
        .zip(&basis.chi)
        .map(|(a, chi)| a * (chi * (1.0 - chi)).max(0.0).sqrt() / norm)
        .collect();
    Ok(SchemeWeights {
        scheme: Scheme::CwWideband,
        ws,
        wv,
    })
}

pub fn weights_cw_filtered(basis: &SpheroidalBasis) -> Result<SchemeWeights> {
    let eps = lo_overlap(basis)
        .iter()
        .zip(&basis.chi)
        .map(|(a, chi)| a * chi)
        .collect();
    Ok(SchemeWeights {
        scheme: Scheme::CwFiltered,
        ws: normalized(eps)?,
        wv: vec![0.0; basis.k_max],
    })
}

pub fn weights_pulsed(basis: &SpheroidalBasis) -> Result<SchemeWeights> {
    let eps = basis
        .s_at_zero
        .iter()
        .zip(&basis.chi)
        .enumerate()
        .map(|(k, (s0, chi))| (((2 * k + 1) as f64) * chi).sqrt() * s0.abs())
        .collect();
    Ok(SchemeWeights {
        scheme: Scheme::Pulsed,
        ws: normalized(eps)?,
        wv: vec![0.0; basis.k_max],
    })
}

pub fn scheme_weights(scheme: Scheme, basis: &SpheroidalBasis) -> Result<SchemeWeights> {
    match scheme {
        Scheme::CwWideband => weights_cw_wideband(basis),
        Scheme::CwFiltered => weights_cw_filtered(basis),
        Scheme::Pulsed => weights_pulsed(basis),
        Scheme::SingleMode => Ok(SchemeWeights::single_mode()),
    }
}

/// Smallest K with `Σ_{k≥K} χₖ < tol`, capped at `cap`. The tail is taken
/// from the trace identity `Σ χₖ = BT`.
pub fn weight_mode_count(basis: &SpheroidalBasis, tol: f64, cap: usize) -> usize {
    let mut captured = 0.0;
    let total = basis.bt();
    for (k, chi) in basis.chi.iter().enumerate() {
        captured += chi;
        if total - captured < tol {
            return (k + 1).min(cap).max(1);
        }
    }
    basis.k_max.min(cap).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnconditionalVariances {
    pub sigma_minus_sq: f64,
    pub sigma_plus_sq: f64,
    /// 1 - τ + σ₋²τ
    pub var_x: f64,
    /// 1 - τ + σ₊²τ
    pub var_p: f64,
}

pub fn unconditional_variances(
    weights: &SchemeWeights,
    spec: &SqueezingSpec,
    tau: f64,
) -> Result<UnconditionalVariances> {
    check_unit_interval("tau", tau)?;
    if weights.ws.len() > spec.r.len() {
        return Err(Error::Inconsistent(format!(
            "{} weights but only {} squeezed modes",
            weights.ws.len(),
            spec.r.len()
        )));
    }
    let vacuum: f64 = weights.wv.iter().map(|w| w * w).sum();
    let (mut minus, mut plus) = (vacuum, vacuum);
    for (w, r) in weights.ws.iter().zip(&spec.r) {
        minus += w * w * (-2.0 * r).exp();
        plus += w * w * (2.0 * r).exp();
    }
    Ok(UnconditionalVariances {
        sigma_minus_sq: minus,
        sigma_plus_sq: plus,
        var_x: 1.0 - tau + minus * tau,
        var_p: 1.0 - tau + plus * tau,
    })
}

/// Single-number mode overlap `(1/BT)|∫_{-πB}^{πB} sin(ΩT/2)/(πΩ) dΩ|²`
/// = `(4/π²) Si(πBT/2)² / BT`.
pub fn grosshans_eta_eff(bt: f64) -> Result<f64> {
    if !(bt > 0.0) || !bt.is_finite() {
        return Err(Error::Domain {
            name: "bt",
            value: bt,
            expected: "finite and > 0",
        });
    }
    let si = sine_integral(PI * bt / 2.0);
    Ok(4.0 / (PI * PI) * si * si / bt)
}

/// Location and value of the maximum of [`grosshans_eta_eff`].
///
/// With y = πBT/2 the stationarity condition is `2 sin y = Si(y)`.
pub fn grosshans_eta_eff_max() -> Result<(f64, f64)> {
    let y = bisect(|y| 2.0 * y.sin() - sine_integral(y), 1.0, 3.0, 1e-14)?;
    let bt = 2.0 * y / PI;
    Ok((bt, grosshans_eta_eff(bt)?))
}

/// `|∫_{-πB}^{πB} Φₖ(Ω) sin(ΩT/2)/(πΩ) dΩ - χₖ Φₖ(0)|`.
pub fn mode_weight_identity_residual(
    basis: &SpheroidalBasis,
    k: usize,
    bandwidth_hz: f64,
    duration_s: f64,
) -> Result<f64> {
    basis.check_scale(bandwidth_hz, duration_s)?;
    let band = PI * bandwidth_hz;
    let mut failure = None;
    let lhs = basis.rule().integrate(-band, band, |omega| {
        match basis.eval_mode_function(k, bandwidth_hz, duration_s, ModePoint::Frequency(omega)) {
            Ok(phi) => phi.re * duration_s / (2.0 * PI) * sinc(omega * duration_s / 2.0),
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let phi0 = basis
        .eval_mode_function(k, bandwidth_hz, duration_s, ModePoint::Frequency(0.0))?
        .re;
    Ok((lhs - basis.chi[k] * phi0).abs())
}
