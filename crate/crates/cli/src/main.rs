//! `hardy`: command-line front end for the pointwise Hardy toolkit.
//!
//! Exit status is 0 when every certificate passes, 1 when at least one
//! fails, and 2 on usage, input or output errors.

mod cmd;
mod io;

use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use hardy_core::Exec;

#[derive(Parser)]
#[command(name = "hardy", version, about = "Pointwise Hardy inequalities on finite metric measure graphs")]
struct Cli {
    /// Additive slack when judging `lhs <= rhs`.
    #[arg(long, global = true, default_value_t = hardy_core::EPS_NUM)]
    eps_num: f64,

    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed of every sampled family.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restricted maximal function, optionally with the weak-type estimate.
    Maximal(cmd::maximal::Args),
    /// Two-point curve form of the Poincaré inequality at every pair.
    PoincareCheck(cmd::poincare::Args),
    /// Curve form of the pointwise Hardy inequality at every point of Ω.
    HardyCheck(cmd::hardy::Args),
    /// Optimizer bounds for the α-function.
    Alpha(cmd::alpha::Args),
    /// Self-improvement experiment.
    SelfImprove(cmd::improve::Args),
    /// Writes an example space and domain.
    GenSpace(cmd::gen::Args),
}

pub struct Globals {
    pub eps_num: f64,
    pub seed: u64,
    pub exec: Exec,
}

fn setup(cli: &Cli) -> Result<Globals> {
    if !(cli.eps_num >= 0.0 && cli.eps_num.is_finite()) {
        bail!("--eps-num must be a finite nonnegative number, got {}", cli.eps_num);
    }
    let exec = match cli.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(1) => Exec::Sequential,
        Some(_n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new().num_threads(_n).build_global()?;
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    Ok(Globals {
        eps_num: cli.eps_num,
        seed: cli.seed,
        exec,
    })
}

fn run(cli: Cli) -> Result<bool> {
    let globals = setup(&cli)?;
    match cli.command {
        Command::Maximal(a) => cmd::maximal::run(a, &globals),
        Command::PoincareCheck(a) => cmd::poincare::run(a, &globals),
        Command::HardyCheck(a) => cmd::hardy::run(a, &globals),
        Command::Alpha(a) => cmd::alpha::run(a, &globals),
        Command::SelfImprove(a) => cmd::improve::run(a, &globals),
        Command::GenSpace(a) => cmd::gen::run(a, &globals),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
