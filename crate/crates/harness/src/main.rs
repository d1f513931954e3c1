use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coulomb_harness::commands::{
    cmd_equilibrium, cmd_estimate, cmd_report, cmd_sample, cmd_verify, RunOptions, REPORT_FILE,
};
use coulomb_harness::spec::LoadedSpec;
use coulomb_harness::{exit, HarnessError};

#[derive(Parser)]
#[command(name = "coulomb-lab", version, about = "Numerical laboratory for Coulomb gases and jellium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve μ∞ (and μ_θ when the config asks for it) and write the artifacts.
    Equilibrium(Common),
    /// Draw Coulomb gas samples.
    Sample(Common),
    /// Run the identity and inequality contracts.
    Verify(Common),
    /// Run the configured estimators on the samples of the same config and seed.
    Estimate(Common),
    /// Write a markdown summary of every report for the config.
    Report(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampler worker threads; results do not depend on it.
    #[arg(long, env = "COULOMB_LAB_THREADS")]
    threads: Option<usize>,
    /// Run a single contract (verify only).
    #[arg(long)]
    only: Option<String>,
    /// Output directory, overriding the config's.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let (Command::Equilibrium(c) | Command::Sample(c) | Command::Verify(c) | Command::Estimate(c) | Command::Report(c)) =
        &cli.command;
    let loaded = LoadedSpec::load(&c.config, c.out.as_deref())?;
    let opts = RunOptions { seed: c.seed, threads: c.threads, only: c.only.clone() };
    match cli.command {
        Command::Equilibrium(_) => println!("{}", cmd_equilibrium(&loaded, &opts)?.display()),
        Command::Sample(_) => println!("{}", cmd_sample(&loaded, &opts)?.display()),
        Command::Estimate(_) => println!("{}", cmd_estimate(&loaded, &opts)?.display()),
        Command::Report(_) => println!("{}", cmd_report(&loaded, &opts)?.join(REPORT_FILE).display()),
        Command::Verify(_) => {
            let outcome = cmd_verify(&loaded, &opts)?;
            for r in &outcome.reports {
                for line in r.lines() {
                    println!("{line}");
                }
            }
            println!("{}", outcome.dir.display());
            if let Some(e) = outcome.failure() {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
