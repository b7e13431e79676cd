use clap::{Parser, Subcommand};
use std::path::PathBuf;

use vsi_achieve::montecarlo::CheckerKind;

#[derive(Debug, Parser)]
#[command(
    name = "vsi-achieve",
    version,
    about = "Certify and map achievable P/Q setpoints of a grid-tied inverter"
)]
pub struct Args {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `sampling.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides `sampling.checker`.
    #[arg(long, global = true)]
    pub checker: Option<CheckerKind>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `gain`, row-major: `k11,k12,k21,k22`.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub gain: Option<Vec<f64>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verdict for one setpoint, printed as JSON.
    Check {
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
    },
    /// Evaluate every cell of the configured grid into region.csv.
    Map,
    /// Random gain search; writes sweep.jsonl and best_gain.json.
    Optimize,
    /// Closed-loop trajectories for one setpoint over the profile ensemble.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
    },
    /// Print the resolved configuration.
    DumpConfig,
}
