//! Single-mode photon subtraction in the Fock basis.

use std::f64::consts::PI;

use statrs::function::factorial::binomial;

use crate::conditional_state::{ScenarioParams, P_DET_FLOOR};
use crate::error::{Error, Result};
use crate::photodetection::povm_counts;

pub const FOCK_TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockOracleResult {
    pub w_origin: f64,
    pub p_det: f64,
    pub cutoff: usize,
    /// Probability mass of the input state beyond the cutoff.
    pub tail: f64,
}

/// Squeezed-vacuum amplitudes ⟨2m|S(r)|0⟩ up to `cutoff`, plus the tail mass.
fn squeezed_vacuum(r: f64, cutoff: usize) -> (Vec<f64>, f64) {
    let t = -r.tanh();
    let mut amp = vec![0.0; cutoff + 1];
    let mut c = 1.0 / r.cosh().sqrt();
    let mut n = 0;
    while n <= cutoff {
        amp[n] = c;
        let m = (n / 2) as f64;
        c *= t * ((2.0 * m + 1.0) * (2.0 * m + 2.0)).sqrt() / (2.0 * (m + 1.0));
        n += 2;
    }
    let mut tail = 0.0;
    while c * c > f64::MIN_POSITIVE {
        tail += c * c;
        let m = (n / 2) as f64;
        c *= t * ((2.0 * m + 1.0) * (2.0 * m + 2.0)).sqrt() / (2.0 * (m + 1.0));
        n += 2;
        if c * c < 1e-6 * f64::EPSILON * tail {
            break;
        }
    }
    (amp, tail)
}

/// W(0,0) of the heralded single mode, as `(1/π) Σ (-1)ʲ ρⱼⱼ`.
pub fn fock_origin_value(params: &ScenarioParams) -> Result<FockOracleResult> {
    if params.mode_count() != 1 || params.weights.wv.iter().any(|&w| w != 0.0) {
        return Err(Error::Inconsistent(
            "the Fock oracle handles one perfectly matched mode".into(),
        ));
    }
    let r = params.spec.r[0];
    let cutoff = if params.spec.gamma > 0.5 { 80 } else { 40 };
    let (amp, tail) = squeezed_vacuum(r, cutoff);
    if tail > FOCK_TAIL_TOLERANCE {
        return Err(Error::FockTruncation { cutoff, tail });
    }
    let tau = params.tau;
    let eta = params.det.eta_k[0];
    let nu = params.det.nu_total;
    let off = povm_counts(0, eta, nu, cutoff)?;
    // 1 - off_l without cancellation
    let click: Vec<f64> = (0..=cutoff)
        .map(|l| {
            let log_loss = if l == 0 { 0.0 } else { l as f64 * (1.0 - eta).ln() };
            -(log_loss - nu).exp_m1()
        })
        .collect();
    debug_assert!(off.iter().zip(&click).all(|(o, c)| (o + c - 1.0).abs() < 1e-12));

    let mut rho_click = vec![0.0; cutoff + 1];
    for (n, &c) in amp.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for j in 0..=n {
            let l = n - j;
            let p = c * c * binomial(n as u64, j as u64) * tau.powi(j as i32) * (1.0 - tau).powi(l as i32);
            rho_click[j] += p * click[l];
        }
    }
    let p_det: f64 = rho_click.iter().sum();
    if !(p_det >= P_DET_FLOOR) {
        return Err(Error::DegenerateScenario {
            p_det,
            floor: P_DET_FLOOR,
        });
    }
    let parity: f64 = rho_click
        .iter()
        .enumerate()
        .map(|(j, &p)| if j % 2 == 0 { p } else { -p })
        .sum();
    Ok(FockOracleResult {
        w_origin: parity / (PI * p_det),
        p_det,
        cutoff,
        tail,
    })
}
