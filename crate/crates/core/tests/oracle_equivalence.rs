use std::f64::consts::PI;

use nongauss::oracles::{fock_origin_value, GaussianOracle};
use nongauss::{gaussian_factors, Error, ScenarioInputs, ScenarioParams, Scheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

fn inputs(scheme: Scheme, bt: f64, gamma: f64, tau: f64, eta: f64, n: f64) -> ScenarioInputs {
    ScenarioInputs {
        scheme,
        bt,
        gamma,
        tau,
        eta,
        dark_rate: n,
        ..Default::default()
    }
}

fn points(rng: &mut ChaCha8Rng, count: usize) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    pts.extend((0..count).map(|_| (rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5))));
    pts
}

fn compare(params: &ScenarioParams, pts: &[(f64, f64)]) -> Option<f64> {
    let closed = gaussian_factors(params);
    let oracle = GaussianOracle::from_params(params);
    match (closed, oracle) {
        (Ok(f), Ok(o)) => Some(
            pts.iter()
                .map(|&(x, p)| (f.wigner(x, p) - o.wigner(x, p)).abs())
                .fold(0.0, f64::max),
        ),
        (Err(Error::DegenerateScenario { .. }), Err(Error::DegenerateScenario { .. })) => None,
        (a, b) => panic!("routes disagree on degeneracy: {:?} vs {:?}", a.err(), b.err()),
    }
}

#[test]
fn closed_form_matches_gaussian_operator_oracle_on_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for scheme in [Scheme::CwWideband, Scheme::CwFiltered, Scheme::Pulsed] {
        for &bt in &[0.1, 0.5, 1.0] {
            let basis = inputs(scheme, bt, 0.0, 0.9, 0.0, 0.0).solve_basis().unwrap();
            for &gamma in &[0.0, 0.2, 0.35] {
                for &tau in &[0.8, 0.9, 0.99] {
                    for &eta in &[0.0, 0.1, 0.7, 1.0] {
                        for &n in &[0.0, 500.0, 5000.0] {
                            let params = inputs(scheme, bt, gamma, tau, eta, n).build_on(&basis).unwrap();
                            let pts = points(&mut rng, 3);
                            if let Some(d) = compare(&params, &pts) {
                                worst = worst.max(d);
                                compared += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(compared > 600);
    assert!(worst <= TOL, "max deviation {worst:e}");
}

#[test]
fn single_mode_routes_agree() {
    for &gamma in &[0.0, 0.2, 0.35] {
        for &tau in &[0.8, 0.9, 0.99] {
            for &eta in &[0.0, 0.1, 0.7, 1.0] {
                for &n in &[0.0, 500.0, 5000.0] {
                    let params = inputs(Scheme::SingleMode, 0.0, gamma, tau, eta, n).build().unwrap();
                    let closed = gaussian_factors(&params);
                    let fock = fock_origin_value(&params);
                    let gauss = GaussianOracle::from_params(&params);
                    match (closed, fock, gauss) {
                        (Ok(f), Ok(r), Ok(o)) => {
                            let w = f.wigner(0.0, 0.0);
                            assert!((w - r.w_origin).abs() <= TOL, "closed {w} vs fock {}", r.w_origin);
                            assert!((o.wigner(0.0, 0.0) - r.w_origin).abs() <= TOL);
                            assert!((r.p_det - f.p_det).abs() <= 1e-12);
                        }
                        (Err(_), Err(_), Err(_)) => {}
                        other => panic!("inconsistent outcomes: {other:?}"),
                    }
                }
            }
        }
    }
}

#[test]
fn three_mode_filtered_example() {
    let mut params = inputs(Scheme::CwFiltered, 0.5, 0.35, 0.9, 0.7, 0.0).build().unwrap();
    let k = 3;
    params.spec.r.truncate(k);
    params.spec.lambda.truncate(k);
    params.det.eta_k.truncate(k);
    params.weights.ws.truncate(k);
    params.weights.wv.truncate(k);
    let norm = params.weights.ws.iter().map(|w| w * w).sum::<f64>().sqrt();
    params.weights.ws.iter_mut().for_each(|w| *w /= norm);
    let params = ScenarioParams::new(params.spec, params.weights, params.det, params.tau).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = compare(&params, &points(&mut rng, 5)).unwrap();
    assert!(d <= TOL, "{d:e}");
}

#[test]
fn fock_oracle_limits() {
    // dark-only triggers select nothing
    let params = ScenarioInputs {
        scheme: Scheme::SingleMode,
        bt: 0.0,
        eta: 0.0,
        dark_rate: 1e6,
        ..Default::default()
    }
    .build()
    .unwrap();
    assert!((params.det.nu_total - 0.1).abs() < 1e-15);
    let r = fock_origin_value(&params).unwrap();
    let f = gaussian_factors(&params).unwrap();
    assert!((r.w_origin - f.r_unconditional(0.0, 0.0)).abs() < 1e-10);

    let vac = ScenarioInputs {
        scheme: Scheme::SingleMode,
        bt: 0.0,
        gamma: 0.0,
        dark_rate: 1e5,
        ..Default::default()
    }
    .build()
    .unwrap();
    assert!((fock_origin_value(&vac).unwrap().w_origin - 1.0 / PI).abs() < 1e-12);
}

#[test]
fn oracle_with_no_detection_is_unconditional() {
    let params = inputs(Scheme::CwWideband, 1.0, 0.35, 0.9, 0.0, 5000.0).build().unwrap();
    let f = gaussian_factors(&params).unwrap();
    let o = GaussianOracle::from_params(&params).unwrap();
    for &(x, p) in &[(0.0, 0.0), (0.7, -0.2), (-1.5, 1.1)] {
        assert!((o.wigner(x, p) - f.r_unconditional(x, p)).abs() < 1e-10);
    }
}
