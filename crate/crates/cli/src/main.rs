//! `hybridamp`: simulate, optimise and compare hybrid Raman/EDFA links.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybridamp::config::Fidelity;

/// Exit status for invalid command-line usage or unusable paths.
const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "hybridamp", version, about = "Hybrid Raman/EDFA link modelling and design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario and write SNR, gain and summary reports.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the first span's power profiles.
        #[arg(long)]
        trace_power_evolution: bool,
        /// Also write the per-channel NLI powers.
        #[arg(long)]
        nli_breakdown: bool,
    },
    /// Search pump powers (and optionally wavelengths) and launch power.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Swarm iterations (overrides the config).
        #[arg(long)]
        iterations: Option<usize>,
        /// Swarm size (overrides the config).
        #[arg(long)]
        particles: Option<usize>,
        /// Scenario to compare the optimum against.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Compare a scenario against a baseline channel by channel.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        baseline: PathBuf,
    },
    /// Repeat the run recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Write into this directory instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `fast` or `reference`; defaults to reference, or fast for the
    /// optimisation search.
    #[arg(long)]
    fidelity: Option<Fidelity>,
    /// Worker threads; HYBRIDAMP_THREADS applies when the flag is absent.
    #[arg(long, env = "HYBRIDAMP_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let request = match cli.command {
        Command::Simulate { common, trace_power_evolution, nli_breakdown } => {
            run::Request::simulate(common.into(), trace_power_evolution, nli_breakdown)
        }
        Command::Optimize { common, seed, iterations, particles, baseline } => {
            run::Request::optimize(common.into(), seed, iterations, particles, baseline)
        }
        Command::Compare { common, baseline } => run::Request::compare(common.into(), baseline),
        Command::Replay { manifest, out } => match run::Request::from_manifest(&manifest, out) {
            Ok(r) => r,
            Err(e) => return fail(&e),
        },
    };
    match run::execute(&request) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &hybridamp::Error) -> ExitCode {
    eprintln!("error: {e}");
    let code = match e {
        hybridamp::Error::Io { .. } => EXIT_USAGE,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    };
    ExitCode::from(code)
}

impl From<Common> for run::Options {
    fn from(c: Common) -> Self {
        run::Options {
            config: c.config,
            out: c.out,
            fidelity: c.fidelity,
            threads: c.threads,
        }
    }
}
