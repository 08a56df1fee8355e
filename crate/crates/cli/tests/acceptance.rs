//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::process::Command;
use std::time::Instant;

use nongauss::conditional_state::GridSpec;
use nongauss::oracles::{fock_origin_value, GaussianOracle};
use nongauss::pswf::{solve_spheroidal, BandTimeProduct, DEFAULT_QUAD_ORDER};
use nongauss::spectral_modes::{grosshans_eta_eff, grosshans_eta_eff_max, unconditional_variances};
use nongauss::{gaussian_factors, wigner_grid, wigner_point, Error, ScenarioInputs, Scheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const TABLE: [(f64, &[f64]); 4] = [
    (0.1, &[0.09973, 0.00027, 0.00000]),
    (0.5, &[0.46780, 0.03183, 0.00037, 0.00000]),
    (1.0, &[0.78340, 0.20502, 0.01136, 0.00021, 0.00000]),
    (3.0, &[0.99890, 0.96869, 0.73284, 0.26248, 0.03478, 0.00221, 0.00009]),
];

fn table_eigenvalues() -> Outcome {
    let start = Instant::now();
    let mut misses = Vec::new();
    let mut count = 0;
    let mut worst = 0.0f64;
    for (bt, expected) in TABLE {
        let c = BandTimeProduct::new(bt).unwrap().c();
        let basis = solve_spheroidal(c, expected.len(), DEFAULT_QUAD_ORDER).unwrap();
        for (k, &e) in expected.iter().enumerate() {
            count += 1;
            let d = (basis.chi[k] - e).abs();
            worst = worst.max(d);
            if d > 1e-4 {
                misses.push(format!("BT={bt} k={k}: {:.6} vs {e:.5}", basis.chi[k]));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        misses.is_empty() && secs < 1.0,
        format!(
            "{}/{count} entries within 1e-4, max |Δ| {worst:.2e}, {secs:.2} s{}",
            count - misses.len(),
            if misses.is_empty() {
                String::new()
            } else {
                format!("; off: {}", misses.join(", "))
            }
        ),
    )
}

fn trace_identity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for bt in [0.1, 0.5, 1.0, 3.0, 6.0] {
        let c = BandTimeProduct::new(bt).unwrap().c();
        let basis = solve_spheroidal(c, 40, DEFAULT_QUAD_ORDER).unwrap();
        worst = worst.max((basis.chi.iter().sum::<f64>() - bt).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-8 && secs < 1.0, format!("max |Σχ - BT| {worst:.2e}, {secs:.2} s"))
}

fn legendre_limit() -> Outcome {
    let basis = solve_spheroidal(0.0, 11, DEFAULT_QUAD_ORDER).unwrap();
    let worst = (0..=10)
        .map(|k| (basis.mu[k] - (k * (k + 1)) as f64).abs())
        .fold(0.0, f64::max);
    outcome(worst <= 1e-10, format!("max |μₖ - k(k+1)| {worst:.2e} for k ≤ 10"))
}

fn eta_eff_bound() -> Outcome {
    let (bt_star, max) = grosshans_eta_eff_max().unwrap();
    // independent scan
    let scanned = (1..=20000)
        .map(|i| grosshans_eta_eff(i as f64 * 5e-4).unwrap())
        .fold(0.0, f64::max);
    let pass = (max - 0.825).abs() <= 0.005 && (scanned - max).abs() < 1e-6;
    outcome(pass, format!("max {max:.5} at BT={bt_star:.4}, scan {scanned:.5}"))
}

fn filtered_variance() -> Outcome {
    let gamma = 0.35f64;
    let target = (-2.0 * gamma).exp();
    let mut worst = 0.0f64;
    for bt in [0.05, 0.1, 0.5, 1.0, 2.0, 3.0, 6.0] {
        let params = ScenarioInputs {
            scheme: Scheme::CwFiltered,
            bt,
            gamma,
            ..Default::default()
        }
        .build()
        .unwrap();
        let v = unconditional_variances(&params.weights, &params.spec, params.tau).unwrap();
        worst = worst.max((v.sigma_minus_sq - target).abs());
    }
    outcome(worst <= 1e-10, format!("max |σ₋² - e^(-2γ)| {worst:.2e} over 7 gate lengths"))
}

fn negativity_claims() -> Outcome {
    let long = ScenarioInputs {
        scheme: Scheme::CwFiltered,
        bt: 3.0,
        eta: 1.0,
        ..Default::default()
    }
    .build()
    .unwrap();
    let w_long = wigner_point(&long, 0.0, 0.0).unwrap();
    let mut parts = vec![format!("(a) BT=3 η=1: W(0,0)={w_long:.5}")];
    let mut pass = w_long >= 0.0;
    for bt in [0.0, 0.5, 1.0] {
        let p = ScenarioInputs {
            bt,
            eta: 0.1,
            dark_rate: 500.0,
            ..Default::default()
        }
        .build()
        .unwrap();
        let w = wigner_point(&p, 0.0, 0.0).unwrap();
        pass &= w < 0.0;
        parts.push(format!("BT={bt}: {w:.5}"));
    }
    outcome(pass, format!("{}; (b) {}", parts[0], parts[1..].join(", ")))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut compared = 0;
    let mut disagreements = 0;
    let mut check = |params: &nongauss::ScenarioParams, rng: &mut ChaCha8Rng, single: bool| {
        let closed = gaussian_factors(params);
        let gauss = GaussianOracle::from_params(params);
        match (closed, gauss) {
            (Ok(f), Ok(o)) => {
                compared += 1;
                let mut pts = vec![(0.0, 0.0)];
                for _ in 0..3 {
                    pts.push((rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5)));
                }
                for (x, p) in pts {
                    worst = worst.max((f.wigner(x, p) - o.wigner(x, p)).abs());
                }
                if single {
                    let fock = fock_origin_value(params).unwrap();
                    worst = worst.max((fock.w_origin - f.wigner(0.0, 0.0)).abs());
                    worst = worst.max((fock.w_origin - o.wigner(0.0, 0.0)).abs());
                }
            }
            (Err(Error::DegenerateScenario { .. }), Err(Error::DegenerateScenario { .. })) => {}
            _ => disagreements += 1,
        }
    };
    let grid = |scheme, bt| {
        let mut out = Vec::new();
        for gamma in [0.0, 0.2, 0.35] {
            for tau in [0.8, 0.9, 0.99] {
                for eta in [0.0, 0.1, 0.7, 1.0] {
                    for n in [0.0, 500.0, 5000.0] {
                        out.push(ScenarioInputs {
                            scheme,
                            bt,
                            gamma,
                            tau,
                            eta,
                            dark_rate: n,
                            ..Default::default()
                        });
                    }
                }
            }
        }
        out
    };
    for scheme in [Scheme::CwWideband, Scheme::CwFiltered, Scheme::Pulsed] {
        for bt in [0.1, 0.5, 1.0] {
            let cases = grid(scheme, bt);
            let basis = cases[0].solve_basis().unwrap();
            for case in cases {
                check(&case.build_on(&basis).unwrap(), &mut rng, false);
            }
        }
    }
    for case in grid(Scheme::SingleMode, 0.0) {
        check(&case.build().unwrap(), &mut rng, true);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && disagreements == 0 && secs < 30.0,
        format!("{compared} scenarios, max deviation {worst:.2e}, {disagreements} degeneracy disagreements, {secs:.2} s"),
    )
}

const GOLDEN_SINGLE_MODE: f64 = -0.2753722532503034;

fn golden_single_mode() -> Outcome {
    let p = ScenarioInputs {
        scheme: Scheme::SingleMode,
        bt: 0.0,
        eta: 1.0,
        ..Default::default()
    }
    .build()
    .unwrap();
    let w = wigner_point(&p, 0.0, 0.0).unwrap();
    let fock = fock_origin_value(&p).unwrap().w_origin;
    let pass = (w - GOLDEN_SINGLE_MODE).abs() <= 1e-9 && (fock - GOLDEN_SINGLE_MODE).abs() <= 1e-9;
    outcome(pass, format!("closed form {w:.12}, Fock {fock:.12}, golden {GOLDEN_SINGLE_MODE:.12}"))
}

fn normalization() -> Outcome {
    let mut runs = 0;
    let mut pass = true;
    let mut worst_ratio = 0.0f64;
    let configs = [
        (Scheme::SingleMode, 0.0, 1.0, 0.0),
        (Scheme::CwFiltered, 0.5, 0.1, 500.0),
        (Scheme::CwWideband, 1.0, 0.1, 500.0),
        (Scheme::Pulsed, 1.0, 0.7, 5000.0),
        (Scheme::CwFiltered, 3.0, 1.0, 0.0),
    ];
    let grids = [
        GridSpec::default(),
        GridSpec {
            x_min: -5.0,
            x_max: 5.0,
            nx: 101,
            p_min: -5.0,
            p_max: 5.0,
            np: 101,
        },
        GridSpec {
            x_min: -2.0,
            x_max: 1.5,
            nx: 9,
            p_min: -3.0,
            p_max: 3.0,
            np: 14,
        },
    ];
    for (scheme, bt, eta, n) in configs {
        let params = ScenarioInputs {
            scheme,
            bt,
            eta,
            dark_rate: n,
            ..Default::default()
        }
        .build()
        .unwrap();
        for grid in grids {
            let r = wigner_grid(&params, grid).unwrap();
            runs += 1;
            pass &= r.mass.analytic_total == 1.0 && r.mass.within_bound;
            let err = (r.mass.numerical - r.mass.analytic_window).abs();
            worst_ratio = worst_ratio.max(err / r.mass.error_bound);
        }
    }
    outcome(
        pass,
        format!("{runs} grids, analytic mass exactly 1, worst |numerical - analytic| / bound {worst_ratio:.2e}"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_nongauss");
    let run = |format: &str| {
        Command::new(bin)
            .args(["verify", "--seed", "1234", "--draws", "8", "--format", format])
            .output()
            .expect("spawn nongauss")
    };
    let mut pass = true;
    let mut sizes = Vec::new();
    for format in ["csv", "json"] {
        let a = run(format);
        let b = run(format);
        pass &= a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
        sizes.push(format!("{format} {} bytes", a.stdout.len()));
    }
    outcome(pass, format!("two verify runs per format byte-identical ({})", sizes.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("eigenvalue table", table_eigenvalues),
        ("trace identity", trace_identity),
        ("Legendre limit", legendre_limit),
        ("single-number overlap bound", eta_eff_bound),
        ("filtered CW variance", filtered_variance),
        ("negativity at reference settings", negativity_claims),
        ("oracle equivalence", oracle_equivalence),
        ("golden single-mode origin value", golden_single_mode),
        ("normalization", normalization),
        ("determinism", determinism),
    ];
    println!();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("\nacceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
