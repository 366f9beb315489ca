//! `parsearch`: solve, verify and simulate the parallel-search stopping problem.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig, SimulateFlags, VerifyFlags};

#[derive(Debug, Parser)]
#[command(name = "parsearch", version, about)]
struct Cli {
    /// Log progress to stderr (-vv for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the variational inequality and write the field, boundary and diagnostics.
    Solve {
        #[command(flatten)]
        flags: Flags,
    },
    /// Run the two-alternative invariant checks and write verify.json.
    Verify {
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        verify: VerifyFlags,
    },
    /// Estimate values by simulating the solved stopping rule.
    Simulate {
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        sim: SimulateFlags,
    },
}

fn run(cli: Cli) -> error::CliResult<()> {
    match cli.command {
        Command::Solve { flags } => {
            let cfg = RunConfig::resolve(&flags, &VerifyFlags::default(), &SimulateFlags::default())?;
            commands::solve::run(&cfg)
        }
        Command::Verify { flags, verify } => {
            let cfg = RunConfig::resolve(&flags, &verify, &SimulateFlags::default())?;
            commands::verify::run(&cfg)
        }
        Command::Simulate { flags, sim } => {
            let cfg = RunConfig::resolve(&flags, &VerifyFlags::default(), &sim)?;
            commands::simulate::run(&cfg)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
