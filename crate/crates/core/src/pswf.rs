//! Angular prolate spheroidal wave functions S₀ₖ(c, x) and the eigenvalues
//! χₖ(c) of the sinc kernel on [-1, 1].
//!
//! The spheroidal differential operator
//! `-(d/dx)(1 - x²)(d/dx) + c²x²` is tridiagonal in each parity class of the
//! orthonormal Legendre basis, so each class is diagonalized separately.
//! Eigenfunctions are stored as ordinary Legendre series
//! `S₀ₖ(c, x) = Σₙ aₙ Pₙ(x)` normalized to `∫ S₀ₖ² dx = 2 / (2k + 1)`, with
//! the sign chosen so that S₀ₖ → Pₖ as c → 0.
//!
//! χₖ is extracted from the finite Fourier transform
//! `∫ e^{icxy} S₀ₖ(c, y) dy = 2 iᵏ R₀ₖ(c, 1) S₀ₖ(c, x)` and
//! `χₖ = (2c/π) R₀ₖ(c, 1)²`, and checked against the Rayleigh quotient of the
//! sinc kernel evaluated with the same Gauss–Legendre rule.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Eigenvalues below this are reported as exactly zero and flagged.
pub const CHI_UNDERFLOW: f64 = 1e-14;

pub const DEFAULT_QUAD_ORDER: usize = 200;

/// Largest tolerated disagreement between the Fourier and kernel routes to χₖ.
pub const DUAL_ROUTE_TOLERANCE: f64 = 1e-8;

/// The dimensionless product B·T and the spheroidal parameter c = πBT/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandTimeProduct {
    bt: f64,
}

impl BandTimeProduct {
    pub fn new(bt: f64) -> Result<Self> {
        if !bt.is_finite() || bt < 0.0 {
            return Err(Error::Domain {
                name: "bt",
                value: bt,
                expected: "finite and >= 0",
            });
        }
        Ok(Self { bt })
    }

    pub fn from_band_and_duration(bandwidth_hz: f64, duration_s: f64) -> Result<Self> {
        Self::new(bandwidth_hz * duration_s)
    }

    pub fn bt(self) -> f64 {
        self.bt
    }

    pub fn c(self) -> f64 {
        PI * self.bt / 2.0
    }
}

/// Number of Legendre terms kept for a basis with `k_max` modes.
pub fn series_length(c: f64, k_max: usize) -> usize {
    k_max + 30.max((2.0 * c).ceil() as usize + 20)
}

/// Largest `k_max` whose series (and its products with the kernel) the
/// `quad_order`-point rule still integrates reliably.
pub fn safe_kmax(c: f64, quad_order: usize) -> usize {
    let kernel_degree = (2.0 * c).ceil() as usize + 20;
    let budget = (2 * quad_order).saturating_sub(1 + kernel_degree);
    budget.saturating_sub(30.max(kernel_degree))
}

/// Legendre polynomial Pₖ(x) by the three-term recurrence.
pub fn legendre_p(k: usize, x: f64) -> f64 {
    let (mut p_prev, mut p) = (1.0, x);
    if k == 0 {
        return 1.0;
    }
    for n in 1..k {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
    }
    p
}

/// Closed form of Pₖ(0): `(-1)^{k/2} (k-1)!!/k!!` for even k, zero for odd k.
pub fn legendre_p_at_zero(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let ratio: f64 = (1..=k / 2).map(|j| (2 * j - 1) as f64 / (2 * j) as f64).product();
    if (k / 2).is_multiple_of(2) {
        ratio
    } else {
        -ratio
    }
}

fn legendre_series(coeffs: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    let (mut p_prev, mut p) = (0.0, 1.0);
    for (n, &a) in coeffs.iter().enumerate() {
        if n > 0 {
            let nf = (n - 1) as f64;
            let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
            p_prev = p;
            p = next;
        }
        sum += a * p;
    }
    sum
}

/// d/dx Σ aₙPₙ at x = 0, using Pₙ'(0) = n Pₙ₋₁(0).
fn legendre_series_slope_at_zero(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, &a)| a * n as f64 * legendre_p_at_zero(n - 1))
        .sum()
}

/// Where a mode function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModePoint {
    /// Angular frequency Ω in rad/s.
    Frequency(f64),
    /// Time t in s.
    Time(f64),
}

/// Solved spheroidal modes for a fixed c.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpheroidalBasis {
    pub c: f64,
    pub k_max: usize,
    /// Eigenvalues μₖ of the differential operator.
    pub mu: Vec<f64>,
    /// Kernel eigenvalues χₖ(c), Fourier route, underflow set to zero.
    pub chi: Vec<f64>,
    /// Kernel eigenvalues from the sinc-kernel Rayleigh quotient.
    pub chi_kernel: Vec<f64>,
    pub chi_underflow: Vec<bool>,
    /// Coefficients on Pₙ(x), length `series_length(c, k_max)`.
    pub legendre_coeffs: Vec<Vec<f64>>,
    pub s_at_zero: Vec<f64>,
    pub r1_at_one: Vec<f64>,
    pub quad_order: usize,
    #[serde(skip)]
    rule: OnceLock<GaussLegendre>,
}

/// Solves the time/band-limited eigenproblem for the first `k_max` modes.
pub fn solve_spheroidal(c: f64, k_max: usize, quad_order: usize) -> Result<SpheroidalBasis> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::Domain {
            name: "c",
            value: c,
            expected: "finite and >= 0",
        });
    }
    if k_max == 0 {
        return Err(Error::Domain {
            name: "k_max",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let safe = safe_kmax(c, quad_order);
    if k_max > safe {
        return Err(Error::TruncationBound {
            requested: k_max,
            safe,
            c,
            quad_order,
        });
    }

    let n_len = series_length(c, k_max);
    let mut mu = vec![0.0; k_max];
    let mut coeffs = vec![Vec::new(); k_max];

    for parity in 0..2usize {
        let indices: Vec<usize> = (parity..n_len).step_by(2).collect();
        let wanted = (k_max + 1 - parity) / 2;
        if wanted == 0 {
            continue;
        }
        let m = indices.len();
        let c2 = c * c;
        let mut op = DMatrix::<f64>::zeros(m, m);
        for (i, &n) in indices.iter().enumerate() {
            let nf = n as f64;
            op[(i, i)] = nf * (nf + 1.0)
                + c2 * (2.0 * nf * nf + 2.0 * nf - 1.0) / ((2.0 * nf - 1.0) * (2.0 * nf + 3.0));
            if i + 1 < m {
                let off = c2 * (nf + 1.0) * (nf + 2.0)
                    / ((2.0 * nf + 3.0) * ((2.0 * nf + 1.0) * (2.0 * nf + 5.0)).sqrt());
                op[(i, i + 1)] = off;
                op[(i + 1, i)] = off;
            }
        }
        let eig = SymmetricEigen::try_new(op, f64::EPSILON, 1000 * m.max(10)).ok_or(
            Error::EigenNonConvergence {
                parity: if parity == 0 { "even" } else { "odd" },
                size: m,
            },
        )?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        for (j, &col) in order.iter().take(wanted).enumerate() {
            let k = 2 * j + parity;
            mu[k] = eig.eigenvalues[col];
            let mut a = vec![0.0; n_len];
            for (i, &n) in indices.iter().enumerate() {
                a[n] = eig.eigenvectors[(i, col)] * ((2 * n + 1) as f64 / (2 * k + 1) as f64).sqrt();
            }
            let reference = if parity == 0 {
                legendre_series(&a, 0.0) * legendre_p_at_zero(k)
            } else {
                legendre_series_slope_at_zero(&a) * legendre_p_at_zero(k - 1)
            };
            if reference < 0.0 {
                a.iter_mut().for_each(|v| *v = -*v);
            }
            coeffs[k] = a;
        }
    }

    let rule = GaussLegendre::new(quad_order);
    let nodes = rule.nodes();
    let weights = rule.weights();
    let kernel = DMatrix::from_fn(nodes.len(), nodes.len(), |i, j| {
        sinc_kernel(c, nodes[i] - nodes[j])
    });

    let mut chi = vec![0.0; k_max];
    let mut chi_kernel = vec![0.0; k_max];
    let mut chi_underflow = vec![false; k_max];
    let mut r1_at_one = vec![0.0; k_max];
    let mut s_at_zero = vec![0.0; k_max];

    for k in 0..k_max {
        let a = &coeffs[k];
        let s: Vec<f64> = nodes.iter().map(|&x| legendre_series(a, x)).collect();
        if k % 2 == 0 {
            s_at_zero[k] = legendre_series(a, 0.0);
        }

        // Fourier route at the node where |S| is largest.
        let (i_star, _) = s
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("non-empty rule");
        let x_star = nodes[i_star];
        let s_star = s[i_star];
        let r1 = if k % 2 == 0 {
            let integral: f64 = nodes
                .iter()
                .zip(weights)
                .zip(&s)
                .map(|((&y, &w), &sy)| w * (c * x_star * y).cos() * sy)
                .sum();
            sign_of_power(k / 2) * integral / (2.0 * s_star)
        } else {
            let integral: f64 = nodes
                .iter()
                .zip(weights)
                .zip(&s)
                .map(|((&y, &w), &sy)| w * (c * x_star * y).sin() * sy)
                .sum();
            sign_of_power((k - 1) / 2) * integral / (2.0 * s_star)
        };
        r1_at_one[k] = r1;

        let norm: f64 = weights.iter().zip(&s).map(|(w, v)| w * v * v).sum();
        let mut quad_form = 0.0;
        for i in 0..nodes.len() {
            let row: f64 = (0..nodes.len()).map(|j| kernel[(i, j)] * weights[j] * s[j]).sum();
            quad_form += weights[i] * s[i] * row;
        }
        chi_kernel[k] = quad_form / norm;

        let fourier = (2.0 * c / PI * r1 * r1).min(1.0);
        if (fourier - chi_kernel[k]).abs() > DUAL_ROUTE_TOLERANCE {
            return Err(Error::Inconsistent(format!(
                "chi_{k}: Fourier route {fourier:e} disagrees with kernel route {:e}",
                chi_kernel[k]
            )));
        }
        if fourier < CHI_UNDERFLOW {
            chi_underflow[k] = true;
            chi[k] = 0.0;
        } else {
            chi[k] = fourier;
        }
    }

    let basis = SpheroidalBasis {
        c,
        k_max,
        mu,
        chi,
        chi_kernel,
        chi_underflow,
        legendre_coeffs: coeffs,
        s_at_zero,
        r1_at_one,
        quad_order,
        rule: OnceLock::new(),
    };
    let _ = basis.rule.set(rule);
    Ok(basis)
}

fn sign_of_power(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn sinc_kernel(c: f64, d: f64) -> f64 {
    c / PI * crate::quadrature::sinc(c * d)
}

impl SpheroidalBasis {
    pub fn bt(&self) -> f64 {
        2.0 * self.c / PI
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub(crate) fn rule(&self) -> &GaussLegendre {
        self.rule.get_or_init(|| GaussLegendre::new(self.quad_order))
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k < self.k_max {
            Ok(())
        } else {
            Err(Error::ModeIndex { k, k_max: self.k_max })
        }
    }

    /// S₀ₖ(c, x) for |x| ≤ 1.
    pub fn eval_s(&self, k: usize, x: f64) -> Result<f64> {
        self.check_index(k)?;
        if !(x.abs() <= 1.0) {
            return Err(Error::Domain {
                name: "x",
                value: x,
                expected: "|x| <= 1",
            });
        }
        Ok(legendre_series(&self.legendre_coeffs[k], x))
    }

    /// `∫_{-1}^{1} e^{icxy} S₀ₖ(c, y) dy`, valid for any real x.
    pub fn finite_fourier(&self, k: usize, x: f64) -> Result<Complex64> {
        self.check_index(k)?;
        let a = &self.legendre_coeffs[k];
        let c = self.c;
        Ok(self
            .rule()
            .integrate_complex(-1.0, 1.0, |y| Complex64::from_polar(legendre_series(a, y), c * x * y)))
    }

    /// Φₖ(c, Ω) in the frequency domain or Ψₖ(c, t) in the time domain.
    ///
    /// Φₖ vanishes for |Ω| > πB. Ψₖ outside the gate |t| > T/2 is obtained
    /// from the finite Fourier transform of S₀ₖ rather than the Legendre series.
    pub fn eval_mode_function(
        &self,
        k: usize,
        bandwidth_hz: f64,
        duration_s: f64,
        point: ModePoint,
    ) -> Result<Complex64> {
        self.check_index(k)?;
        self.check_scale(bandwidth_hz, duration_s)?;
        let kf = (2 * k + 1) as f64;
        match point {
            ModePoint::Frequency(omega) => {
                let x = omega / (PI * bandwidth_hz);
                if x.abs() > 1.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                Ok(Complex64::new((kf / bandwidth_hz).sqrt() * self.eval_s(k, x)?, 0.0))
            }
            ModePoint::Time(t) => {
                let x = 2.0 * t / duration_s;
                if x.abs() <= 1.0 {
                    let phase = Complex64::new(0.0, -1.0).powu(k as u32);
                    Ok(phase * ((kf * bandwidth_hz).sqrt() * self.r1_at_one[k] * self.eval_s(k, x)?))
                } else {
                    let ft = self.finite_fourier(k, x)?.conj();
                    Ok(ft * (0.5 * bandwidth_hz * (kf / bandwidth_hz).sqrt()))
                }
            }
        }
    }

    pub fn check_scale(&self, bandwidth_hz: f64, duration_s: f64) -> Result<()> {
        let implied = PI * bandwidth_hz * duration_s / 2.0;
        if !(bandwidth_hz > 0.0 && duration_s > 0.0)
            || (implied - self.c).abs() > 1e-12 * self.c.max(1.0)
        {
            return Err(Error::ScaleMismatch {
                bandwidth_hz,
                duration_s,
                implied,
                basis: self.c,
            });
        }
        Ok(())
    }

    /// `2c/π - Σₖ χₖ`, the eigenvalue mass not captured by the retained modes.
    pub fn trace_deficit(&self) -> f64 {
        self.bt() - self.chi.iter().sum::<f64>()
    }

    /// Largest |χₖ(Fourier) - χₖ(kernel)| over retained modes.
    pub fn dual_route_gap(&self) -> f64 {
        self.chi
            .iter()
            .zip(&self.chi_kernel)
            .zip(&self.chi_underflow)
            .map(|((a, b), &under)| if under { b.abs() } else { (a - b).abs() })
            .fold(0.0, f64::max)
    }

    /// The first `k` modes of this basis.
    pub fn truncated(&self, k: usize) -> Result<SpheroidalBasis> {
        if k == 0 || k > self.k_max {
            return Err(Error::ModeIndex { k, k_max: self.k_max });
        }
        Ok(SpheroidalBasis {
            c: self.c,
            k_max: k,
            mu: self.mu[..k].to_vec(),
            chi: self.chi[..k].to_vec(),
            chi_kernel: self.chi_kernel[..k].to_vec(),
            chi_underflow: self.chi_underflow[..k].to_vec(),
            legendre_coeffs: self.legendre_coeffs[..k].to_vec(),
            s_at_zero: self.s_at_zero[..k].to_vec(),
            r1_at_one: self.r1_at_one[..k].to_vec(),
            quad_order: self.quad_order,
            rule: self.rule.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_values_at_zero() {
        assert_eq!(legendre_p(0, 0.0), 1.0);
        assert_eq!(legendre_p(2, 0.0), -0.5);
        assert_eq!(legendre_p(3, 0.0), 0.0);
        for k in 0..30 {
            assert!((legendre_p(k, 0.0) - legendre_p_at_zero(k)).abs() < 1e-15, "k = {k}");
        }
        assert!((legendre_p(4, 0.3) - (35.0 * 0.3f64.powi(4) - 30.0 * 0.09 + 3.0) / 8.0).abs() < 1e-15);
    }

    #[test]
    fn c_zero_reduces_to_legendre() {
        let basis = solve_spheroidal(0.0, 11, DEFAULT_QUAD_ORDER).unwrap();
        for k in 0..11 {
            assert!((basis.mu[k] - (k * (k + 1)) as f64).abs() < 1e-10);
            assert_eq!(basis.chi[k], 0.0);
            for &x in &[-1.0, -0.7, 0.0, 0.25, 0.9, 1.0] {
                let got = basis.eval_s(k, x).unwrap();
                assert!((got - legendre_p(k, x)).abs() < 1e-12, "k = {k}, x = {x}");
            }
        }
    }

    #[test]
    fn table_values_small_products() {
        let basis = solve_spheroidal(BandTimeProduct::new(1.0).unwrap().c(), 8, DEFAULT_QUAD_ORDER).unwrap();
        let table = [0.78340, 0.20502, 0.01136, 0.00021];
        for (k, expected) in table.iter().enumerate() {
            assert!((basis.chi[k] - expected).abs() <= 1e-4, "chi_{k} = {}", basis.chi[k]);
        }
    }

    #[test]
    fn odd_modes_vanish_at_origin() {
        let basis = solve_spheroidal(1.2, 6, DEFAULT_QUAD_ORDER).unwrap();
        assert_eq!(basis.eval_s(1, 0.0).unwrap(), 0.0);
        assert_eq!(basis.s_at_zero[3], 0.0);
    }

    #[test]
    fn domain_errors() {
        let basis = solve_spheroidal(1.0, 3, DEFAULT_QUAD_ORDER).unwrap();
        assert!(matches!(basis.eval_s(0, 1.5), Err(Error::Domain { .. })));
        assert!(matches!(basis.eval_s(5, 0.0), Err(Error::ModeIndex { .. })));
        assert!(matches!(solve_spheroidal(-1.0, 3, 200), Err(Error::Domain { .. })));
        let err = solve_spheroidal(1.0, 500, 200).unwrap_err();
        match err {
            Error::TruncationBound { safe, .. } => assert_eq!(safe, safe_kmax(1.0, 200)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mismatched_scale_is_rejected() {
        let basis = solve_spheroidal(BandTimeProduct::new(0.5).unwrap().c(), 3, DEFAULT_QUAD_ORDER).unwrap();
        let r = basis.eval_mode_function(0, 1e7, 1e-7, ModePoint::Time(0.0));
        assert!(matches!(r, Err(Error::ScaleMismatch { .. })));
        assert!(basis.eval_mode_function(0, 1e7, 5e-8, ModePoint::Time(0.0)).is_ok());
    }

    #[test]
    fn radial_factor_is_positive() {
        let basis = solve_spheroidal(2.0, 8, DEFAULT_QUAD_ORDER).unwrap();
        assert!(basis.r1_at_one.iter().all(|&r| r > 0.0), "{:?}", basis.r1_at_one);
    }
}
