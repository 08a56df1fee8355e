//! Wigner function of the photon-subtracted state seen through the
//! LO-matched mode.
//!
//! Heralding on an "on" click leaves `(R̂(0,0) - R̂(η,ν)) / P_det`. Both terms
//! are centred, axis-aligned Gaussians in the LO-matched quadratures, so the
//! conditional Wigner function is a difference of two Gaussians:
//!
//! ```text
//! W(x,p) = [R(x,p;0,0) - R(x,p;η,ν)] / P_det
//! R(x,p;η,ν) = 𝒩 / (π √(ζ₊ζ₋)) · exp(-x²/ζ₋ - p²/ζ₊)
//! ```
//!
//! Units: vacuum has W = e^{-x²-p²}/π.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{check_nonnegative, check_unit_interval, Error, Result};
use crate::photodetection::{gamma_pm, log_off_probability, DetectorModel};
use crate::pswf::{safe_kmax, solve_spheroidal, BandTimeProduct, SpheroidalBasis, DEFAULT_QUAD_ORDER};
use crate::quadrature::bisect;
use crate::spectral_modes::{
    scheme_weights, squeezing_spectrum, unconditional_variances, weight_mode_count, Scheme,
    SchemeWeights, SqueezingSpec, DEFAULT_KMAX_CAP, WEIGHT_TAIL_TOLERANCE,
};

/// Heralding probabilities below this are treated as "no trigger possible".
pub const P_DET_FLOOR: f64 = 1e-12;

/// Modes whose squared weight falls below this are dropped from ζ±.
pub const WEIGHT_DROP: f64 = 1e-14;

/// Everything needed to evaluate the conditional state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub spec: SqueezingSpec,
    pub weights: SchemeWeights,
    pub det: DetectorModel,
    pub tau: f64,
    /// Σχₖ over modes beyond the retained set.
    pub omitted_chi: f64,
}

impl ScenarioParams {
    pub fn new(spec: SqueezingSpec, weights: SchemeWeights, det: DetectorModel, tau: f64) -> Result<Self> {
        check_unit_interval("tau", tau)?;
        let m = weights.ws.len();
        if spec.lambda.len() != m || det.eta_k.len() != m {
            return Err(Error::Inconsistent(format!(
                "mode counts differ: {} weights, {} squeezed modes, {} detector modes",
                m,
                spec.lambda.len(),
                det.eta_k.len()
            )));
        }
        if !weights.wv.is_empty() && weights.wv.len() != m {
            return Err(Error::Inconsistent(format!(
                "{} vacuum weights for {} modes",
                weights.wv.len(),
                m
            )));
        }
        Ok(Self {
            spec,
            weights,
            det,
            tau,
            omitted_chi: 0.0,
        })
    }

    pub fn with_dark_rate(&self, dark_rate: f64) -> Result<Self> {
        Ok(Self {
            det: self.det.with_dark_rate(dark_rate)?,
            ..self.clone()
        })
    }

    pub fn mode_count(&self) -> usize {
        self.weights.ws.len()
    }
}

/// Physical inputs from which a [`ScenarioParams`] is assembled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInputs {
    pub scheme: Scheme,
    pub bt: f64,
    pub bandwidth_hz: f64,
    /// Gate duration; derived as bt/B when absent. Required to be consistent
    /// with bt for the multimode schemes. For the single-mode limit (bt = 0)
    /// it defaults to 1/B.
    pub duration_s: Option<f64>,
    pub gamma: f64,
    pub tau: f64,
    pub eta: f64,
    pub dark_rate: f64,
    pub kmax_cap: usize,
}

impl Default for ScenarioInputs {
    fn default() -> Self {
        Self {
            scheme: Scheme::CwFiltered,
            bt: 0.5,
            bandwidth_hz: 10e6,
            duration_s: None,
            gamma: 0.35,
            tau: 0.9,
            eta: 0.1,
            dark_rate: 0.0,
            kmax_cap: DEFAULT_KMAX_CAP,
        }
    }
}

impl ScenarioInputs {
    /// True when the scenario collapses to one perfectly matched mode.
    pub fn is_single_mode(&self) -> bool {
        self.scheme == Scheme::SingleMode || self.bt == 0.0
    }

    pub fn gate_duration(&self) -> Result<f64> {
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            return Err(Error::Domain {
                name: "bandwidth_hz",
                value: self.bandwidth_hz,
                expected: "finite and > 0",
            });
        }
        let derived = self.bt / self.bandwidth_hz;
        match self.duration_s {
            Some(t) if self.bt > 0.0 && (t - derived).abs() > 1e-12 * derived => Err(Error::Inconsistent(
                format!("duration {t} s does not match bt/B = {derived} s"),
            )),
            Some(t) => Ok(t),
            None if self.bt > 0.0 => Ok(derived),
            None => Ok(1.0 / self.bandwidth_hz),
        }
    }

    pub fn build(&self) -> Result<ScenarioParams> {
        BandTimeProduct::new(self.bt)?;
        check_nonnegative("gamma", self.gamma)?;
        let duration = self.gate_duration()?;
        if self.is_single_mode() {
            let spec = squeezing_spectrum(self.gamma, self.bandwidth_hz, 1);
            let det = DetectorModel::single_mode(self.eta, self.dark_rate, duration)?;
            return ScenarioParams::new(spec, SchemeWeights::single_mode(), det, self.tau);
        }
        let full = self.solve_basis()?;
        self.build_on(&full)
    }

    /// The basis [`build`](Self::build) would solve for this bt.
    pub fn solve_basis(&self) -> Result<SpheroidalBasis> {
        let c = BandTimeProduct::new(self.bt)?.c();
        let probe = (self.bt.ceil() as usize + 30).min(safe_kmax(c, DEFAULT_QUAD_ORDER));
        solve_spheroidal(c, probe, DEFAULT_QUAD_ORDER)
    }

    /// Like [`build`](Self::build) but reusing an already solved basis for the
    /// same bt. Ignored in the single-mode limit.
    pub fn build_on(&self, full: &SpheroidalBasis) -> Result<ScenarioParams> {
        if self.is_single_mode() {
            return self.build();
        }
        check_nonnegative("gamma", self.gamma)?;
        let duration = self.gate_duration()?;
        let c = BandTimeProduct::new(self.bt)?.c();
        if (full.c - c).abs() > 1e-12 * c.max(1.0) {
            return Err(Error::Inconsistent(format!(
                "basis solved for c = {} but bt = {} needs c = {c}",
                full.c, self.bt
            )));
        }
        let k = weight_mode_count(full, WEIGHT_TAIL_TOLERANCE, self.kmax_cap);
        let basis = full.truncated(k)?;
        let weights = scheme_weights(self.scheme, &basis)?;
        let spec = squeezing_spectrum(self.gamma, self.bandwidth_hz, k);
        let det = DetectorModel::new(self.eta, self.dark_rate, duration, basis.chi())?;
        let mut params = ScenarioParams::new(spec, weights, det, self.tau)?;
        params.omitted_chi = basis.trace_deficit().max(0.0);
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFactors {
    pub zeta_plus: f64,
    pub zeta_minus: f64,
    pub gamma_pm: Vec<(f64, f64)>,
    /// Off probability 𝒩(η, ν).
    pub n_factor: f64,
    pub p_det: f64,
    pub var_x0: f64,
    pub var_p0: f64,
    /// Bound on the error from dropped weights and omitted modes.
    pub truncation_bound: f64,
}

impl GaussianFactors {
    /// R(x,p;0,0), the unconditional Gaussian.
    pub fn r_unconditional(&self, x: f64, p: f64) -> f64 {
        (-x * x / self.var_x0 - p * p / self.var_p0).exp() / (PI * (self.var_x0 * self.var_p0).sqrt())
    }

    /// R(x,p;η,ν), the "off" Gaussian including its weight 𝒩.
    pub fn r_off(&self, x: f64, p: f64) -> f64 {
        self.n_factor * self.off_shape(x, p)
    }

    /// R(x,p;η,ν)/𝒩, a unit-mass Gaussian.
    pub fn off_shape(&self, x: f64, p: f64) -> f64 {
        (-x * x / self.zeta_minus - p * p / self.zeta_plus).exp() / (PI * (self.zeta_plus * self.zeta_minus).sqrt())
    }

    /// `(R₀ - 𝒩S)/P_det` rearranged as `(R₀ - S)/P_det + S` with S the
    /// unit-mass off shape, which stays accurate when P_det is small.
    pub fn wigner(&self, x: f64, p: f64) -> f64 {
        let s = self.off_shape(x, p);
        (self.r_unconditional(x, p) - s) / self.p_det + s
    }

    /// Total phase-space mass from the closed-form Gaussian integrals.
    pub fn analytic_mass(&self) -> f64 {
        // R₀ and S both carry unit mass, so the bracket integrates to zero
        1.0
    }
}

fn raw_factors(params: &ScenarioParams) -> Result<GaussianFactors> {
    let tau = params.tau;
    let var = unconditional_variances(&params.weights, &params.spec, tau)?;
    let log_n = log_off_probability(&params.spec, &params.det, tau)?;

    let mut gammas = Vec::with_capacity(params.mode_count());
    let (mut sum_plus, mut sum_minus, mut dropped) = (0.0, 0.0, 0.0);
    for ((&lambda, &eta_k), &w) in params
        .spec
        .lambda
        .iter()
        .zip(&params.det.eta_k)
        .zip(&params.weights.ws)
    {
        let (gp, gm) = gamma_pm(lambda, eta_k, tau);
        gammas.push((gp, gm));
        let w2 = w * w;
        if w2 < WEIGHT_DROP {
            dropped += 2.0 * lambda.abs() / (1.0 - lambda.abs()) * w2;
            continue;
        }
        sum_plus += 2.0 * lambda / gp * w2;
        sum_minus += 2.0 * lambda / gm * w2;
    }
    let sinh_sq = params.spec.gamma.sinh().powi(2);
    let tail = (1.0 - tau) * params.det.eta * sinh_sq * params.omitted_chi;

    Ok(GaussianFactors {
        zeta_plus: 1.0 + tau * sum_plus,
        zeta_minus: 1.0 - tau * sum_minus,
        gamma_pm: gammas,
        n_factor: log_n.exp(),
        p_det: -log_n.exp_m1(),
        var_x0: var.var_x,
        var_p0: var.var_p,
        truncation_bound: tau * dropped + tail,
    })
}

pub fn gaussian_factors(params: &ScenarioParams) -> Result<GaussianFactors> {
    let f = raw_factors(params)?;
    if !(f.p_det >= P_DET_FLOOR) {
        return Err(Error::DegenerateScenario {
            p_det: f.p_det,
            floor: P_DET_FLOOR,
        });
    }
    Ok(f)
}

pub fn wigner_point(params: &ScenarioParams, x: f64, p: f64) -> Result<f64> {
    Ok(gaussian_factors(params)?.wigner(x, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -3.0,
            x_max: 3.0,
            nx: 61,
            p_min: -3.0,
            p_max: 3.0,
            np: 61,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("np", self.np)] {
            if n < 2 {
                return Err(Error::Domain {
                    name,
                    value: n as f64,
                    expected: ">= 2",
                });
            }
        }
        if !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::Inconsistent("grid ranges must be increasing".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { b } else { a + h * i as f64 }).collect()
}

/// Grid-integrated mass compared against the closed-form mass in the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassCheck {
    /// Whole-plane mass, closed form (1 up to rounding).
    pub analytic_total: f64,
    /// Closed-form mass inside the grid window.
    pub analytic_window: f64,
    /// Trapezoidal integral of the sampled grid.
    pub numerical: f64,
    /// Trapezoid error bound from the Gaussians' second derivatives.
    pub error_bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerResult {
    pub params: ScenarioParams,
    pub factors: GaussianFactors,
    pub grid: GridSpec,
    /// `(x, p, W)`, x-major: index `i * np + j` holds `(xᵢ, pⱼ)`.
    pub samples: Vec<[f64; 3]>,
    pub origin_value: f64,
    pub mass: MassCheck,
}

pub fn wigner_grid(params: &ScenarioParams, grid: GridSpec) -> Result<WignerResult> {
    grid.validate()?;
    let factors = gaussian_factors(params)?;
    let xs = grid.xs();
    let ps = grid.ps();
    let samples: Vec<[f64; 3]> = xs
        .iter()
        .flat_map(|&x| ps.iter().map(move |&p| (x, p)))
        .map(|(x, p)| [x, p, factors.wigner(x, p)])
        .collect();
    let mass = mass_check(&factors, &grid, &samples);
    Ok(WignerResult {
        params: params.clone(),
        origin_value: factors.wigner(0.0, 0.0),
        factors,
        grid,
        samples,
        mass,
    })
}

struct AxisGaussian {
    window_mass: f64,
    trapezoid_error: f64,
}

/// exp(-x²/ζ)/√(πζ) on [a, b] with n trapezoid nodes.
fn axis_gaussian(zeta: f64, a: f64, b: f64, n: usize) -> AxisGaussian {
    let s = zeta.sqrt();
    let h = (b - a) / (n - 1) as f64;
    let max_second = 2.0 / (zeta * (PI * zeta).sqrt());
    AxisGaussian {
        window_mass: 0.5 * (erf(b / s) - erf(a / s)),
        trapezoid_error: (b - a) * h * h / 12.0 * max_second,
    }
}

fn mass_check(f: &GaussianFactors, grid: &GridSpec, samples: &[[f64; 3]]) -> MassCheck {
    let term = |weight: f64, zx: f64, zp: f64| {
        let gx = axis_gaussian(zx, grid.x_min, grid.x_max, grid.nx);
        let gp = axis_gaussian(zp, grid.p_min, grid.p_max, grid.np);
        let mass = weight * gx.window_mass * gp.window_mass;
        let bound = weight
            * (gx.trapezoid_error * (gp.window_mass + gp.trapezoid_error)
                + gx.window_mass * gp.trapezoid_error);
        (mass, bound)
    };
    let (m0, b0) = term(1.0, f.var_x0, f.var_p0);
    let (m1, b1) = term(1.0, f.zeta_minus, f.zeta_plus);
    let analytic_window = (m0 - m1) / f.p_det + m1;
    let error_bound = (b0 + b1) / f.p_det + b1;

    let hx = (grid.x_max - grid.x_min) / (grid.nx - 1) as f64;
    let hp = (grid.p_max - grid.p_min) / (grid.np - 1) as f64;
    let edge = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
    let numerical: f64 = samples
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let (i, j) = (idx / grid.np, idx % grid.np);
            edge(i, grid.nx) * edge(j, grid.np) * s[2]
        })
        .sum::<f64>()
        * hx
        * hp;
    // rounding allowance on top of the analytic bound
    let slack = 1e-12 * (2.0 / f.p_det + 1.0);
    MassCheck {
        analytic_total: f.analytic_mass(),
        analytic_window,
        numerical,
        error_bound,
        within_bound: (numerical - analytic_window).abs() <= error_bound + slack,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub dark_rate: f64,
    /// W(0,0); `None` when no trigger is possible at this rate.
    pub w_origin: Option<f64>,
}

/// W(0,0) as a function of the dark count rate, all other parameters fixed.
pub fn origin_sweep(params: &ScenarioParams, dark_rates: &[f64]) -> Result<Vec<SweepPoint>> {
    dark_rates
        .iter()
        .map(|&n| {
            let p = params.with_dark_rate(n)?;
            match gaussian_factors(&p) {
                Ok(f) => Ok(SweepPoint {
                    dark_rate: n,
                    w_origin: Some(f.wigner(0.0, 0.0)),
                }),
                Err(Error::DegenerateScenario { .. }) => Ok(SweepPoint {
                    dark_rate: n,
                    w_origin: None,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// True when the defined values of a sweep (ordered by rate) never change direction.
pub fn sweep_is_monotone(points: &[SweepPoint]) -> bool {
    let values: Vec<f64> = points.iter().filter_map(|p| p.w_origin).collect();
    let up = values.windows(2).all(|w| w[1] >= w[0]);
    let down = values.windows(2).all(|w| w[1] <= w[0]);
    up || down
}

/// W(0,0) as a function of u = e^{-nT}: a Möbius map `(R₀ - R_η u)/(1 - 𝒩 u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginCurve {
    pub r_unconditional: f64,
    pub r_off_dark_free: f64,
    pub n_dark_free: f64,
    pub duration_s: f64,
}

impl OriginCurve {
    pub fn new(params: &ScenarioParams) -> Result<Self> {
        let f = raw_factors(&params.with_dark_rate(0.0)?)?;
        Ok(Self {
            r_unconditional: f.r_unconditional(0.0, 0.0),
            r_off_dark_free: f.r_off(0.0, 0.0),
            n_dark_free: f.n_factor,
            duration_s: params.det.duration_s,
        })
    }

    /// W(0,0) at dark rate n; the n → 0⁺ limit when no dark-free trigger exists.
    pub fn value(&self, dark_rate: f64) -> f64 {
        if 1.0 - self.n_dark_free < P_DET_FLOOR {
            // both Gaussians coincide, the herald selects nothing
            return self.r_unconditional;
        }
        let u = (-dark_rate * self.duration_s).exp();
        (self.r_unconditional - self.r_off_dark_free * u) / (1.0 - self.n_dark_free * u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ThresholdOutcome {
    /// W(0,0) is already non-negative without dark counts.
    None { w_origin_dark_free: f64 },
    /// W(0,0) is still negative at the end of the search range.
    BeyondRange { w_origin_at_max: f64 },
    Threshold { dark_rate: f64 },
}

impl ThresholdOutcome {
    pub fn dark_rate(&self) -> Option<f64> {
        match self {
            ThresholdOutcome::Threshold { dark_rate } => Some(*dark_rate),
            _ => None,
        }
    }
}

pub const THRESHOLD_REL_TOL: f64 = 1e-6;

/// Dark count rate at which W(0,0) crosses zero, searched on (0, n_max].
pub fn negativity_threshold(params: &ScenarioParams, n_max: f64) -> Result<ThresholdOutcome> {
    if !(n_max > 0.0) || !n_max.is_finite() {
        return Err(Error::Domain {
            name: "n_max",
            value: n_max,
            expected: "finite and > 0",
        });
    }
    let curve = OriginCurve::new(params)?;
    let w0 = curve.value(0.0);
    if w0 >= 0.0 {
        return Ok(ThresholdOutcome::None {
            w_origin_dark_free: w0,
        });
    }
    let w_max = curve.value(n_max);
    if w_max < 0.0 {
        return Ok(ThresholdOutcome::BeyondRange {
            w_origin_at_max: w_max,
        });
    }
    let n_star = bisect(|n| curve.value(n), 0.0, n_max, THRESHOLD_REL_TOL)?;
    Ok(ThresholdOutcome::Threshold { dark_rate: n_star })
}
