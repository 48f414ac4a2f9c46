use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

use commands::Failure;

/// Artificial compressibility runs, ε-sweeps and property checks.
#[derive(Debug, Parser)]
#[command(name = "acflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one configuration and write diagnostics.csv (plus checkpoints).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Continue from an ACNSF1 checkpoint instead of the configured data.
        #[arg(long)]
        restart: Option<PathBuf>,
        /// Checkpoint every this many saves (overrides the config; 0 disables).
        #[arg(long)]
        checkpoint_every: Option<usize>,
    },
    /// Run an ε-sweep and write sweep.ndjson, norms.csv, fits.csv and summary.json.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leray projector algebra on random fields.
    CheckProjectors {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mollifier kernel and smoothing-inequality tables on a 3D unit box.
    MollifierTest {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the (y1) ratio tables as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual of the pressure wave equation along a compressible run.
    WaveResidual {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compressible run against the incompressible reference from the same data.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pressure averaging window in units of √ε.
        #[arg(long, default_value_t = acflow_core::lab::WINDOW_FACTOR)]
        window_factor: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, result) = match cli.command {
        Command::Run { config, out, restart, checkpoint_every } => {
            ("run", commands::run(&config, &out, restart.as_deref(), checkpoint_every))
        }
        Command::Sweep { config, out } => ("sweep", commands::sweep(&config, &out)),
        Command::CheckProjectors { dim, n, trials, seed } => {
            ("check-projectors", commands::check_projectors(dim, n, trials, seed))
        }
        Command::MollifierTest { n, seed, out } => ("mollifier-test", commands::mollifier_test(n, seed, out.as_deref())),
        Command::WaveResidual { config, out } => ("wave-residual", commands::wave_residual(&config, out.as_deref())),
        Command::Compare { config, out, window_factor } => ("compare", commands::compare(&config, &out, window_factor)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("acflow {name}: {f}");
            ExitCode::from(f.code())
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage { .. } => 2,
            Failure::Numerical { .. } | Failure::Checks(_) => 1,
        }
    }
}
