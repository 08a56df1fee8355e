//! Command-line front end: configuration, dispatch and chart-data output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nongauss::Scheme;

use crate::commands::DEFAULT_SWEEP_BTS;
use crate::config::{Format, GridConfig, ScenarioConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nongauss", version, about = "Photon-subtracted broadband squeezed light in spheroidal modes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON scenario file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub bt: Option<f64>,
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub bandwidth_hz: Option<f64>,
    #[arg(long)]
    pub duration_s: Option<f64>,
    /// Dark count rate in counts/s.
    #[arg(long)]
    pub dark_rate: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel eigenvalues χₖ and operator eigenvalues μₖ.
    Eigs(Common),
    /// LO-matched mode weights for a scheme.
    Weights(Common),
    /// Wigner function on a phase-space grid.
    Wigner {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x_max: Option<f64>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        p_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        p_max: Option<f64>,
        #[arg(long)]
        np: Option<usize>,
    },
    /// W(0,0) against the dark count rate, one curve per bt.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Explicit rates, comma separated.
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e5)]
        n_max: f64,
        #[arg(long, default_value_t = 41)]
        n_points: usize,
        #[arg(long, value_delimiter = ',')]
        bt_list: Option<Vec<f64>>,
    },
    /// Dark count rate at which the negativity at the origin disappears.
    Threshold {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e6)]
        n_max: f64,
    },
    /// Compare the closed form against the oracles on random draws.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        draws: usize,
    },
}

impl Common {
    fn flags(&self) -> ScenarioConfig {
        ScenarioConfig {
            scheme: self.scheme,
            bt: self.bt,
            bandwidth_hz: self.bandwidth_hz,
            duration_s: self.duration_s,
            gamma: self.gamma,
            tau: self.tau,
            eta: self.eta,
            dark_rate: self.dark_rate,
            k_max: self.kmax,
            grid: GridConfig::default(),
            format: self.format,
        }
    }

    pub fn resolve(&self, grid: GridConfig) -> Result<ScenarioConfig, CliError> {
        let base = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        let cfg = base.overlay(ScenarioConfig { grid, ..self.flags() });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eigs(common) => {
            let cfg = common.resolve(GridConfig::default())?;
            let t = commands::eigs(&cfg)?;
            output::emit(&t.render(cfg.format()), common.out.as_deref())?;
        }
        Command::Weights(common) => {
            let cfg = common.resolve(GridConfig::default())?;
            let t = commands::weights(&cfg)?;
            output::emit(&t.render(cfg.format()), common.out.as_deref())?;
        }
        Command::Wigner {
            common,
            x_min,
            x_max,
            nx,
            p_min,
            p_max,
            np,
        } => {
            let cfg = common.resolve(GridConfig {
                x_min,
                x_max,
                nx,
                p_min,
                p_max,
                np,
            })?;
            let run = commands::wigner(&cfg)?;
            output::emit(&run.table.render(cfg.format()), common.out.as_deref())?;
            if !run.within_bound {
                return Err(CliError::Numerical(
                    "grid mass differs from the analytic mass by more than the quadrature bound".into(),
                ));
            }
        }
        Command::Sweep {
            common,
            n_values,
            n_max,
            n_points,
            bt_list,
        } => {
            let cfg = common.resolve(GridConfig::default())?;
            let rates = n_values.unwrap_or_else(|| commands::linear_rates(n_max, n_points));
            let bts = match bt_list {
                Some(list) => list,
                None if cfg.bt_was_given() => vec![cfg.resolved_bt()],
                None => DEFAULT_SWEEP_BTS.to_vec(),
            };
            let t = commands::sweep(&cfg, &bts, &rates)?;
            output::emit(&t.render(cfg.format()), common.out.as_deref())?;
        }
        Command::Threshold { common, n_max } => {
            let cfg = common.resolve(GridConfig::default())?;
            let t = commands::threshold(&cfg, n_max)?;
            output::emit(&t.render(cfg.format()), common.out.as_deref())?;
        }
        Command::Verify { common, seed, draws } => {
            let cfg = common.resolve(GridConfig::default())?;
            let run = commands::verify(&cfg, seed, draws)?;
            output::emit(&run.table.render(cfg.format()), common.out.as_deref())?;
            if run.failures > 0 {
                return Err(CliError::Verification(format!(
                    "{} draw(s) outside tolerance, max deviation {:e}",
                    run.failures, run.max_deviation
                )));
            }
        }
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("nongauss: {e}");
            e.exit_code()
        }
    }
}
