//! `bcdist`: evaluate, optimise and cross-check the broadcast distortion
//! outer bound from the command line. Payloads are JSON on stdout; data
//! files are CSV; every run with an output directory writes a manifest.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::output::Failure;

#[derive(Debug, Parser)]
#[command(name = "bcdist", version, about = "Gaussian broadcast distortion outer bound toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Scenario file (JSON: power, noises, bandwidth, source_var).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,

    /// Channel input power; overrides the scenario file.
    #[arg(long, global = true)]
    pub power: Option<f64>,

    /// Comma-separated noise variances, noisiest first.
    #[arg(long, global = true)]
    pub noises: Option<String>,

    /// Channel uses per source sample.
    #[arg(long, global = true)]
    pub bandwidth: Option<f64>,

    /// Source variance (default 1).
    #[arg(long, global = true)]
    pub source_var: Option<f64>,

    /// Relative tolerance against P + N_1.
    #[arg(long, global = true, default_value_t = bcdist::bound::DEFAULT_TOLERANCE)]
    pub tolerance: f64,

    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Output directory for payloads, CSVs and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Use the literal figure-caption rate expression (figure1 only).
    #[arg(long, global = true)]
    pub caption_literal: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the bound inequality for one schedule.
    Eval {
        /// Comma-separated distortions D_1..D_K.
        #[arg(long)]
        distortions: String,
        /// Comma-separated schedule tau_1..tau_K; `inf` for +infinity.
        #[arg(long)]
        tau: String,
    },
    /// Decide membership in the outer region.
    Membership {
        #[arg(long, conflicts_with = "at_trivial", required_unless_present = "at_trivial")]
        distortions: Option<String>,
        /// Use the point-to-point distortions D_k*.
        #[arg(long)]
        at_trivial: bool,
        /// Grid points per axis (minus one) for the schedule search.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Trace the minimal D_2 over a grid of D_1 (two receivers).
    Trace {
        #[arg(long)]
        d1_min: Option<f64>,
        #[arg(long)]
        d1_max: Option<f64>,
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
    /// Run the randomised invariant suites.
    VerifyTheorems {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Capacity regions under fixed point-to-point capacities.
    Figure1 {
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        #[arg(long, default_value_t = 5.0)]
        c2: f64,
        /// Comma-separated bandwidth factors.
        #[arg(long = "b", default_value = "0.5,1,2")]
        bandwidths: String,
        #[arg(long, default_value_t = bcdist::capacity::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Monte Carlo run of uncoded transmission (b = 1 only).
    Simulate {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(match f {
                Failure::Input { .. } => 2,
                Failure::Verification(_) => 1,
            })
        }
    }
}
