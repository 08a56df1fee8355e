use nongauss::conditional_state::{sweep_is_monotone, OriginCurve, ThresholdOutcome};
use nongauss::oracles::{fock_origin_value, GaussianOracle};
use nongauss::pswf::{safe_kmax, DEFAULT_QUAD_ORDER};
use nongauss::{
    gaussian_factors, negativity_threshold, origin_sweep, scheme_weights, solve_spheroidal, wigner_grid,
    BandTimeProduct, Error, ScenarioInputs, Scheme, SchemeWeights,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{effective_kmax, ScenarioConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub const DEFAULT_EIGS_KMAX: usize = 8;
pub const DEFAULT_SWEEP_BTS: [f64; 4] = [0.0, 0.5, 1.0, 3.0];
pub const VERIFY_TOLERANCE: f64 = 1e-8;

pub fn eigs(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let bt = BandTimeProduct::new(cfg.resolved_bt())?;
    let k_max = cfg.k_max.unwrap_or(DEFAULT_EIGS_KMAX);
    if k_max == 0 {
        return Err(CliError::Usage("k_max must be >= 1".into()));
    }
    let basis = solve_spheroidal(bt.c(), k_max, DEFAULT_QUAD_ORDER)?;
    let mut t = Table::new("eigs", vec!["k", "chi", "mu"]);
    t.meta("bt", bt.bt());
    t.meta("c", bt.c());
    t.meta("k_max", k_max);
    t.meta("quad_order", DEFAULT_QUAD_ORDER);
    t.meta("safe_k_max", safe_kmax(bt.c(), DEFAULT_QUAD_ORDER));
    t.meta("dual_route_gap", basis.dual_route_gap());
    t.meta("underflow", &basis.chi_underflow);
    for k in 0..k_max {
        t.push(vec![k.into(), basis.chi[k].into(), basis.mu[k].into()]);
    }
    t.push(vec!["sum".into(), basis.chi.iter().sum::<f64>().into(), Cell::Empty]);
    Ok(t)
}

fn scenario(cfg: &ScenarioConfig) -> Result<ScenarioInputs, CliError> {
    Ok(cfg.inputs(effective_kmax(cfg)?))
}

fn scenario_meta(t: &mut Table, inputs: &ScenarioInputs) {
    let scheme = if inputs.is_single_mode() {
        Scheme::SingleMode
    } else {
        inputs.scheme
    };
    t.meta("params", inputs);
    t.meta("effective_scheme", scheme);
}

pub fn weights(cfg: &ScenarioConfig) -> Result<Table, CliError> {
    let inputs = scenario(cfg)?;
    let w: SchemeWeights = if inputs.is_single_mode() {
        SchemeWeights::single_mode()
    } else {
        let bt = BandTimeProduct::new(inputs.bt)?;
        let params = inputs.build()?;
        let k = params.mode_count();
        let basis = solve_spheroidal(bt.c(), k, DEFAULT_QUAD_ORDER)?;
        scheme_weights(inputs.scheme, &basis)?
    };
    let mut t = Table::new("weights", vec!["k", "w_s", "w_v"]);
    scenario_meta(&mut t, &inputs);
    t.meta("mode_count", w.mode_count());
    for (k, ws) in w.ws.iter().enumerate() {
        t.push(vec![k.into(), (*ws).into(), w.wv.get(k).copied().unwrap_or(0.0).into()]);
    }
    t.push(vec!["norm".into(), w.norm_sq().into(), Cell::Empty]);
    Ok(t)
}

pub struct WignerRun {
    pub table: Table,
    pub within_bound: bool,
}

pub fn wigner(cfg: &ScenarioConfig) -> Result<WignerRun, CliError> {
    let inputs = scenario(cfg)?;
    let params = inputs.build()?;
    let result = wigner_grid(&params, cfg.grid())?;
    let f = &result.factors;
    let mut t = Table::new("wigner", vec!["x", "p", "W"]);
    scenario_meta(&mut t, &inputs);
    t.meta("grid", result.grid);
    t.meta("mode_count", params.mode_count());
    t.meta("zeta_plus", f.zeta_plus);
    t.meta("zeta_minus", f.zeta_minus);
    t.meta("n_factor", f.n_factor);
    t.meta("p_det", f.p_det);
    t.meta("var_x0", f.var_x0);
    t.meta("var_p0", f.var_p0);
    t.meta("truncation_bound", f.truncation_bound);
    t.meta("origin_value", result.origin_value);
    t.meta("mass", result.mass);
    for s in &result.samples {
        t.push(vec![s[0].into(), s[1].into(), s[2].into()]);
    }
    Ok(WignerRun {
        table: t,
        within_bound: result.mass.within_bound,
    })
}

pub fn sweep(cfg: &ScenarioConfig, bts: &[f64], rates: &[f64]) -> Result<Table, CliError> {
    if rates.is_empty() {
        return Err(CliError::Usage("empty dark-rate range".into()));
    }
    if bts.is_empty() {
        return Err(CliError::Usage("empty bt list".into()));
    }
    if let Some(bad) = rates.iter().find(|&&n| !(n >= 0.0) || !n.is_finite()) {
        return Err(CliError::Usage(format!("dark rates must be finite and >= 0, got {bad}")));
    }
    let cap = effective_kmax(cfg)?;
    let mut t = Table::new("sweep", vec!["bt", "dark_rate", "w_origin"]);
    t.meta("base", cfg.inputs_at(bts[0], cap));
    let mut monotone = Vec::new();
    for &bt in bts {
        let params = cfg.inputs_at(bt, cap).build()?;
        let points = origin_sweep(&params, rates)?;
        monotone.push(serde_json::json!({ "bt": bt, "monotone": sweep_is_monotone(&points) }));
        for p in points {
            t.push(vec![bt.into(), p.dark_rate.into(), p.w_origin.into()]);
        }
    }
    t.meta("monotone", monotone);
    Ok(t)
}

pub fn threshold(cfg: &ScenarioConfig, n_max: f64) -> Result<Table, CliError> {
    let inputs = scenario(cfg)?;
    let params = inputs.build()?;
    let outcome = negativity_threshold(&params, n_max)?;
    let w0 = OriginCurve::new(&params)?.value(0.0);
    let mut t = Table::new("threshold", vec!["bt", "outcome", "threshold_dark_rate", "w_origin_dark_free"]);
    scenario_meta(&mut t, &inputs);
    t.meta("n_max", n_max);
    t.meta("result", outcome);
    let (label, rate) = match outcome {
        ThresholdOutcome::None { .. } => ("none", Cell::Empty),
        ThresholdOutcome::BeyondRange { .. } => ("beyond_range", Cell::Empty),
        ThresholdOutcome::Threshold { dark_rate } => ("threshold", Cell::Num(dark_rate)),
    };
    let row = vec![inputs.bt.into(), label.into(), rate, w0.into()];
    t.push(row);
    Ok(t)
}

const VERIFY_BTS: [f64; 3] = [0.1, 0.5, 1.0];
const VERIFY_GAMMAS: [f64; 3] = [0.0, 0.2, 0.35];
const VERIFY_TAUS: [f64; 3] = [0.8, 0.9, 0.99];
const VERIFY_ETAS: [f64; 4] = [0.0, 0.1, 0.7, 1.0];
const VERIFY_RATES: [f64; 3] = [0.0, 500.0, 5000.0];

pub struct VerifyRun {
    pub table: Table,
    pub max_deviation: f64,
    pub failures: usize,
}

enum DrawOutcome {
    Compared(f64),
    Degenerate,
    Mismatch(String),
}

fn compare_draw(inputs: &ScenarioInputs, points: &[(f64, f64)]) -> Result<DrawOutcome, CliError> {
    let params = inputs.build()?;
    let closed = gaussian_factors(&params);
    let gauss = GaussianOracle::from_params(&params);
    let (f, o) = match (closed, gauss) {
        (Ok(f), Ok(o)) => (f, o),
        (Err(Error::DegenerateScenario { .. }), Err(Error::DegenerateScenario { .. })) => {
            return Ok(DrawOutcome::Degenerate)
        }
        (a, b) => {
            return Ok(DrawOutcome::Mismatch(format!(
                "closed form {:?}, oracle {:?}",
                a.err(),
                b.err()
            )))
        }
    };
    let mut dev = points
        .iter()
        .map(|&(x, p)| (f.wigner(x, p) - o.wigner(x, p)).abs())
        .fold(0.0, f64::max);
    if inputs.is_single_mode() {
        let fock = fock_origin_value(&params)?;
        dev = dev.max((f.wigner(0.0, 0.0) - fock.w_origin).abs());
    }
    Ok(DrawOutcome::Compared(dev))
}

pub fn verify(cfg: &ScenarioConfig, seed: u64, draws: usize) -> Result<VerifyRun, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = effective_kmax(cfg)?;
    let mut t = Table::new(
        "verify",
        vec!["draw", "scheme", "bt", "gamma", "tau", "eta", "dark_rate", "max_deviation", "status"],
    );
    let mut max_deviation = 0.0f64;
    let mut failures = 0;
    for draw in 0..draws {
        let scheme = *Scheme::ALL.choose(&mut rng).expect("non-empty");
        let bt = if scheme == Scheme::SingleMode {
            0.0
        } else {
            *VERIFY_BTS.choose(&mut rng).expect("non-empty")
        };
        let mut inputs = cfg.inputs_at(bt, cap);
        inputs.scheme = scheme;
        inputs.duration_s = None;
        inputs.gamma = *VERIFY_GAMMAS.choose(&mut rng).expect("non-empty");
        inputs.tau = *VERIFY_TAUS.choose(&mut rng).expect("non-empty");
        inputs.eta = *VERIFY_ETAS.choose(&mut rng).expect("non-empty");
        inputs.dark_rate = *VERIFY_RATES.choose(&mut rng).expect("non-empty");
        let mut points = vec![(0.0, 0.0)];
        for _ in 0..2 {
            points.push((rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5)));
        }
        let (dev, status) = match compare_draw(&inputs, &points)? {
            DrawOutcome::Compared(d) => {
                max_deviation = max_deviation.max(d);
                if d <= VERIFY_TOLERANCE {
                    (Cell::Num(d), "ok".to_string())
                } else {
                    failures += 1;
                    (Cell::Num(d), "fail".to_string())
                }
            }
            DrawOutcome::Degenerate => (Cell::Empty, "degenerate".to_string()),
            DrawOutcome::Mismatch(m) => {
                failures += 1;
                (Cell::Empty, format!("mismatch: {}", m.replace(',', ";")))
            }
        };
        t.push(vec![
            draw.into(),
            scheme.name().into(),
            bt.into(),
            inputs.gamma.into(),
            inputs.tau.into(),
            inputs.eta.into(),
            inputs.dark_rate.into(),
            dev,
            Cell::Text(status),
        ]);
    }
    t.meta("seed", seed);
    t.meta("draws", draws);
    t.meta("tolerance", VERIFY_TOLERANCE);
    t.meta("bandwidth_hz", cfg.bandwidth());
    t.meta("max_deviation", max_deviation);
    t.meta("failures", failures);
    Ok(VerifyRun {
        table: t,
        max_deviation,
        failures,
    })
}

/// `count` evenly spaced rates on [0, n_max].
pub fn linear_rates(n_max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| n_max * i as f64 / (count - 1) as f64).collect(),
    }
}
