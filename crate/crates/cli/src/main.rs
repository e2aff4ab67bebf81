//! `plasmo`: simulate photo-acoustic measurements of plasmonic
//! nano-particle contrast agents and invert them for the particle position
//! and the background permittivity.
//!
//! Exit codes: 0 on success, 2 for invalid inputs, 3 when the imaging
//! pipeline fails on well-formed inputs (the message names the stage).

mod commands;
mod io;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;

#[derive(Parser)]
#[command(
    name = "plasmo",
    version,
    about = "Photo-acoustic simulation and frequency-sweep inversion with plasmonic contrast agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the magnetization tensor and visible modes of a shape
    Spectrum {
        /// The unit ball
        #[arg(long)]
        ball: bool,
        /// Ellipsoid semi-axes, e.g. 1.0,0.7,0.45 (largest must be 1)
        #[arg(long, value_name = "R1,R2,R3")]
        ellipsoid: Option<String>,
    },
    /// Closed-form resonance roots for the scenario's visible eigenvalues
    Dispersion {
        #[arg(long)]
        scenario: PathBuf,
        /// Eigenvalue(s) to solve for instead of the shape's own modes
        #[arg(long = "lambda")]
        lambdas: Vec<f64>,
    },
    /// Record boundary pressure traces (background and with-particle) as CSV
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory for manifest.json and the trace files
        #[arg(long)]
        out: PathBuf,
        /// Excitation frequency
        #[arg(long)]
        omega: f64,
        /// Excitation damping
        #[arg(long)]
        gamma: f64,
        /// Sample spacing (default: chamber radius / 4000)
        #[arg(long)]
        dt: Option<f64>,
        /// Recording duration (default: 2.4 x chamber radius)
        #[arg(long = "t-max")]
        t_max: Option<f64>,
    },
    /// Record the indicator grid over the sweep square as CSV
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// Sweep a single damping row at this value
        #[arg(long = "gamma-fixed")]
        gamma_fixed: Option<f64>,
    },
    /// Estimate the particle position from arrival curves
    Localize {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Full pipeline: localize, find sweep peaks, recover the host permittivity
    Invert {
        #[arg(long)]
        scenario: PathBuf,
        /// Directory of recorded traces to build the arrival curves from
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Sweep a single damping row at this value
        #[arg(long = "gamma-fixed")]
        gamma_fixed: Option<f64>,
    },
}

/// Honors `PLASMO_THREADS` before any parallel work starts.
fn init_threads() {
    if let Ok(text) = std::env::var("PLASMO_THREADS") {
        if let Ok(n) = text.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { ball, ellipsoid } => {
            commands::spectrum(ball, ellipsoid.as_deref())
        }
        Command::Dispersion { scenario, lambdas } => {
            commands::dispersion(&scenario, &lambdas)
        }
        Command::Simulate { scenario, out, omega, gamma, dt, t_max } => {
            commands::simulate(&scenario, &out, omega, gamma, dt, t_max)
        }
        Command::Sweep { scenario, out, gamma_fixed } => {
            commands::sweep(&scenario, &out, gamma_fixed)
        }
        Command::Localize { scenario } => commands::localize_cmd(&scenario),
        Command::Invert { scenario, traces, gamma_fixed } => {
            commands::invert(&scenario, traces.as_deref(), gamma_fixed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Pipeline(message)) => {
            eprintln!("inversion failed: {message}");
            ExitCode::from(3)
        }
    }
}
