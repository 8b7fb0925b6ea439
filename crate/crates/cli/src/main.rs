//! Command-line front end for the sonar navigation simulator.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sonarnav::harness::{
    load_scenario, run_monte_carlo, run_trial, simulate_truth, write_csv, Scenario,
};
use sonarnav::sonar::{rasterize_ping_with, write_pgm};
use sonarnav::{Error, Result};

#[derive(Parser)]
#[command(
    name = "sonarnav",
    version,
    about = "Terrain-aided navigation from side-scan sonar ranges"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario config file (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and write its per-step log as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Dead-reckoning reference: no landmark measurements.
        #[arg(long)]
        no_landmarks: bool,
        /// Measure through the rasterized ping line instead of the direct model.
        #[arg(long)]
        pixels: bool,
    },
    /// Run a Monte Carlo batch and write the RMSE curve as CSV.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: usize,
        #[arg(long)]
        no_landmarks: bool,
    },
    /// Write the binary ping lines along a true trajectory as a PGM image.
    Pingdump {
        #[command(flatten)]
        common: Common,
        /// Number of ping lines.
        #[arg(long, default_value_t = 600)]
        lines: usize,
    },
}

fn load(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_scenario(&text)
}

fn run(cli: Cli) -> std::result::Result<(), (Error, bool)> {
    let config_err = |e: Error| (e, true);
    let runtime_err = |e: Error| {
        let is_config = e.is_config();
        (e, is_config)
    };
    match cli.command {
        Command::Simulate {
            common,
            no_landmarks,
            pixels,
        } => {
            let mut scenario = load(&common.config).map_err(config_err)?;
            if pixels {
                scenario.measurement = "pixels".into();
            }
            let log = run_trial(&scenario, common.seed, !no_landmarks).map_err(runtime_err)?;
            write_csv(&log, &common.out).map_err(runtime_err)
        }
        Command::Montecarlo {
            common,
            runs,
            no_landmarks,
        } => {
            let scenario = load(&common.config).map_err(config_err)?;
            if runs == 0 {
                return Err(config_err(Error::Config {
                    key: "runs".into(),
                    reason: "must be at least 1".into(),
                }));
            }
            let curve = run_monte_carlo(&scenario, runs, common.seed, !no_landmarks)
                .map_err(runtime_err)?;
            write_csv(&curve, &common.out).map_err(runtime_err)
        }
        Command::Pingdump { common, lines } => {
            let scenario = load(&common.config).map_err(config_err)?;
            let map = &scenario.map;
            let pings: Vec<_> = simulate_truth(&scenario, common.seed, lines)
                .iter()
                .map(|state| rasterize_ping_with(state, map.iter().enumerate(), &scenario.sensor))
                .collect();
            let io = |source| {
                runtime_err(Error::Io {
                    path: common.out.clone(),
                    source,
                })
            };
            let mut out = BufWriter::new(File::create(&common.out).map_err(io)?);
            write_pgm(&pings, &mut out).map_err(io)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, is_config)) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_config { 2 } else { 1 })
        }
    }
}
