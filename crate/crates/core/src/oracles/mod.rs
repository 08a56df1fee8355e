//! Reference calculations that share no algebra with the closed form in
//! [`crate::conditional_state`].
//!
//! [`fock`] works in a truncated photon-number basis for the single-mode
//! case. [`gaussian`] propagates covariance matrices through the beamsplitter
//! and the "off" operator for any scheme.

pub mod fock;
pub mod gaussian;

pub use fock::{fock_origin_value, FockOracleResult};
pub use gaussian::{GaussianOracle, GaussianOracleConfig};
