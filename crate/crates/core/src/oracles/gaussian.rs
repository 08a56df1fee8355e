//! Covariance-matrix propagation of each squeezed mode through the
//! beamsplitter, followed by the "off" operator (1-η)^n̂ on the reflected arm.
//!
//! Quadrature convention: vacuum covariance ½·I.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4};

use crate::conditional_state::{ScenarioParams, P_DET_FLOOR};
use crate::error::{Error, Result};

/// Reduced covariances whose condition number exceeds this count as singular.
pub const CONDITION_LIMIT: f64 = 1e14;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMode {
    pub r: f64,
    pub eta: f64,
    pub ws: f64,
    pub wv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianOracleConfig {
    pub modes: Vec<OracleMode>,
    pub tau: f64,
    pub nu_total: f64,
}

impl GaussianOracleConfig {
    pub fn from_params(params: &ScenarioParams) -> Self {
        let modes = (0..params.mode_count())
            .map(|k| OracleMode {
                r: params.spec.r[k],
                eta: params.det.eta_k[k],
                ws: params.weights.ws[k],
                wv: params.weights.wv.get(k).copied().unwrap_or(0.0),
            })
            .collect();
        Self {
            modes,
            tau: params.tau,
            nu_total: params.det.nu_total,
        }
    }
}

/// Two-mode covariance after the beamsplitter, ordered (xA, pA, xB, pB).
fn split_covariance(r: f64, tau: f64) -> Matrix4<f64> {
    let v = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        0.5 * (-2.0 * r).exp(),
        0.5 * (2.0 * r).exp(),
        0.5,
        0.5,
    ));
    let (a, b) = (tau.sqrt(), (1.0 - tau).sqrt());
    #[rustfmt::skip]
    let s = Matrix4::new(
        a, 0.0, b, 0.0,
        0.0, a, 0.0, b,
        -b, 0.0, a, 0.0,
        0.0, -b, 0.0, a,
    );
    s * v * s.transpose()
}

/// Transmitted-arm covariance and trace weight after applying t^n̂ to the
/// reflected arm.
fn off_projected(cov: &Matrix4<f64>, t: f64) -> Result<(Matrix2<f64>, f64)> {
    let inv = cov
        .try_inverse()
        .ok_or(Error::SingularCovariance { condition: f64::INFINITY })?;
    let g = 2.0 * (1.0 - t) / (1.0 + t);
    let mut m = inv;
    m[(2, 2)] += g;
    m[(3, 3)] += g;
    let m_aa = m.fixed_view::<2, 2>(0, 0).into_owned();
    let m_ab = m.fixed_view::<2, 2>(0, 2).into_owned();
    let m_bb = m.fixed_view::<2, 2>(2, 2).into_owned();
    let m_bb_inv = m_bb
        .try_inverse()
        .ok_or(Error::SingularCovariance { condition: f64::INFINITY })?;
    let schur = m_aa - m_ab * m_bb_inv * m_ab.transpose();
    let cov_a = schur
        .try_inverse()
        .ok_or(Error::SingularCovariance { condition: f64::INFINITY })?;
    let weight = 2.0 / ((1.0 + t) * (cov.determinant() * m.determinant()).sqrt());
    Ok((cov_a, weight))
}

fn condition(c: &Matrix2<f64>) -> f64 {
    let e = c.symmetric_eigenvalues();
    let (lo, hi) = (e.min(), e.max());
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn checked(c: Matrix2<f64>) -> Result<Matrix2<f64>> {
    let cond = condition(&c);
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::SingularCovariance { condition: cond });
    }
    Ok(c)
}

fn gaussian_density(c: &Matrix2<f64>, inv: &Matrix2<f64>, x: f64, p: f64) -> f64 {
    let v = nalgebra::Vector2::new(x, p);
    (-0.5 * v.dot(&(inv * v))).exp() / (2.0 * PI * c.determinant().sqrt())
}

/// Conditional Wigner function of the LO-matched mode as
/// `[G(C₀) - s·G(C_off)] / (1 - s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianOracle {
    pub cov_unconditional: Matrix2<f64>,
    pub cov_off: Matrix2<f64>,
    /// Probability that the detector stays off.
    pub off_weight: f64,
    inv_unconditional: Matrix2<f64>,
    inv_off: Matrix2<f64>,
}

impl GaussianOracle {
    pub fn new(config: &GaussianOracleConfig) -> Result<Self> {
        let mut c0 = Matrix2::zeros();
        let mut c_off = Matrix2::zeros();
        let mut s = (-config.nu_total).exp();
        for mode in &config.modes {
            let cov = split_covariance(mode.r, config.tau);
            let (a_off, w) = off_projected(&cov, 1.0 - mode.eta)?;
            s *= w;
            let a0 = cov.fixed_view::<2, 2>(0, 0).into_owned();
            let vac = Matrix2::identity() * (0.5 * mode.wv * mode.wv);
            c0 += a0 * (mode.ws * mode.ws) + vac;
            c_off += a_off * (mode.ws * mode.ws) + vac;
        }
        let c0 = checked(c0)?;
        let c_off = checked(c_off)?;
        if !(1.0 - s >= P_DET_FLOOR) {
            return Err(Error::DegenerateScenario {
                p_det: 1.0 - s,
                floor: P_DET_FLOOR,
            });
        }
        Ok(Self {
            inv_unconditional: c0.try_inverse().expect("checked"),
            inv_off: c_off.try_inverse().expect("checked"),
            cov_unconditional: c0,
            cov_off: c_off,
            off_weight: s,
        })
    }

    pub fn from_params(params: &ScenarioParams) -> Result<Self> {
        Self::new(&GaussianOracleConfig::from_params(params))
    }

    pub fn p_det(&self) -> f64 {
        1.0 - self.off_weight
    }

    pub fn wigner(&self, x: f64, p: f64) -> f64 {
        let g0 = gaussian_density(&self.cov_unconditional, &self.inv_unconditional, x, p);
        let g1 = gaussian_density(&self.cov_off, &self.inv_off, x, p);
        (g0 - self.off_weight * g1) / self.p_det()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_operator_leaves_state_alone() {
        let cov = split_covariance(0.4, 0.8);
        let (a, w) = off_projected(&cov, 1.0).unwrap();
        assert!((w - 1.0).abs() < 1e-14);
        assert!((a - cov.fixed_view::<2, 2>(0, 0)).abs().max() < 1e-14);
    }

    #[test]
    fn vacuum_off_probability_is_one() {
        let cov = split_covariance(0.0, 0.6);
        let (a, w) = off_projected(&cov, 0.3).unwrap();
        assert!((w - 1.0).abs() < 1e-14);
        assert!((a - Matrix2::identity() * 0.5).abs().max() < 1e-14);
    }

    #[test]
    fn single_mode_value() {
        let config = GaussianOracleConfig {
            modes: vec![OracleMode {
                r: 0.35,
                eta: 1.0,
                ws: 1.0,
                wv: 0.0,
            }],
            tau: 0.9,
            nu_total: 0.0,
        };
        let o = GaussianOracle::new(&config).unwrap();
        assert!((o.wigner(0.0, 0.0) + 0.2753722532503034).abs() < 1e-12);
    }

    #[test]
    fn singular_reduction_is_reported() {
        let config = GaussianOracleConfig {
            modes: vec![OracleMode {
                r: 0.3,
                eta: 0.5,
                ws: 0.0,
                wv: 0.0,
            }],
            tau: 0.9,
            nu_total: 0.0,
        };
        assert!(matches!(
            GaussianOracle::new(&config),
            Err(Error::SingularCovariance { .. })
        ));
    }
}
