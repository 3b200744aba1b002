//! `cspa`: simulate partner-antenna campaigns, summarize traces and fit
//! channel models.
//!
//! Exit codes: 0 ok, 1 usage or configuration problem, 2 runtime failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cspa", version, about = "Channel-static partner antenna simulator and analysis toolkit")]
pub struct Cli {
    /// Random seed. Defaults to the scenario's seed (2450 unless the file sets one).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory for written files.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Format of tables printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Trace,
    Summary,
    /// Same file as `trace`: moved_distance_lambda against mag_db / phase_wrapped_rad.
    Plotdata,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a default scenario file.
    Scenario {
        /// Include the synthetic clutter (three weak static scatterers).
        #[arg(long)]
        clutter: bool,
    },
    /// Run the move / dwell / measure campaign and write trace CSVs.
    Simulate {
        /// Scenario file; the built-in free-space default when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// uncompensated, with_movement, counter_movement, no_movement or triple.
        #[arg(long, default_value = "triple")]
        strategy: String,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "trace,summary")]
        emit: Vec<Emit>,
    },
    /// Summary statistics (mean, peak-to-peak, variance) of trace files.
    Analyze {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
    /// Per-metric differences between two traces.
    Compare { first: PathBuf, second: PathBuf },
    /// Generate or fit static channel models.
    Model {
        #[command(subcommand)]
        mode: ModelCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Write a synthetic interval-stationary trace.
    Gen {
        #[arg(long, default_value_t = -43.4, allow_negative_numbers = true)]
        h0_db: f64,
        #[arg(long, default_value_t = -0.293, allow_negative_numbers = true)]
        h0_phase_rad: f64,
        #[arg(long, default_value_t = 0.5711, allow_negative_numbers = true)]
        var_amp: f64,
        #[arg(long, default_value_t = 0.0049, allow_negative_numbers = true)]
        var_phase: f64,
        /// Number of samples.
        #[arg(short = 'n', long, default_value_t = 100_000)]
        samples: usize,
        /// Number of static intervals; intervals after the first get a fresh
        /// initial channel with the same magnitude and a uniform random phase.
        #[arg(long, default_value_t = 1)]
        intervals: usize,
        /// Output file; `<out>/model.csv` when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit a static model to a trace and print its parameters.
    Fit { trace: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
