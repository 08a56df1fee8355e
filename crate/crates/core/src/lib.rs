//! Non-Gaussian states from photon subtraction on broadband squeezed light,
//! described in the spheroidal modes of a finite detection gate.
//!
//! The pipeline runs
//! [`pswf`] (modes and eigenvalues) → [`spectral_modes`] (squeezing and
//! homodyne weights) → [`photodetection`] (on/off detector) →
//! [`conditional_state`] (closed-form Wigner function). [`oracles`] holds two
//! independent reference calculations used for cross-checking.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditional_state;
pub mod error;
pub mod oracles;
pub mod photodetection;
pub mod pswf;
pub mod quadrature;
pub mod spectral_modes;

pub use conditional_state::{
    gaussian_factors, negativity_threshold, origin_sweep, wigner_grid, wigner_point, GaussianFactors,
    GridSpec, ScenarioInputs, ScenarioParams, SweepPoint, ThresholdOutcome, WignerResult,
};
pub use error::{Error, Result};
pub use photodetection::{build_detector, povm_counts, DetectorModel};
pub use pswf::{solve_spheroidal, BandTimeProduct, ModePoint, SpheroidalBasis};
pub use spectral_modes::{
    grosshans_eta_eff, scheme_weights, squeezing_spectrum, Scheme, SchemeWeights, SqueezingSpec,
};
