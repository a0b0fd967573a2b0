use std::path::PathBuf;

use anyhow::Result;

use hardy_core::alpha::AlphaOptions;
use hardy_core::selfimprove::{self_improve_experiment, ExperimentConfig};

use crate::io::{self, Format};
use crate::Globals;

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    omega: PathBuf,
    /// Exponent of the Hardy inequality being improved.
    #[arg(long)]
    p: f64,
    /// Exponent of the Poincaré inequality the space supports.
    #[arg(long)]
    p_prime: f64,
    /// Improved exponent; the midpoint of the admissible range when omitted.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    nu: f64,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Levels τ; repeat the flag or separate with commas.
    #[arg(long, required = true, value_delimiter = ',')]
    tau: Vec<f64>,
    /// Sampled fields per level, in addition to g = 0.
    #[arg(long, default_value_t = 4)]
    trials: u64,
    #[arg(long)]
    c_a: Option<f64>,
    #[arg(long)]
    c_gamma: Option<f64>,
    /// Candidates used when estimating C_A and C_Γ.
    #[arg(long, default_value_t = 24)]
    estimate_trials: u64,
    /// Additive tolerance of the linear-growth check.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Relative gap of the α optimizer.
    #[arg(long, default_value_t = 1e-4)]
    alpha_tol: f64,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    /// JSON report, or the CSV summary when the name ends in `.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the CSV summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

pub fn run(args: Args, globals: &Globals) -> Result<bool> {
    let space = io::load_space(&args.space)?;
    let domain = io::load_domain(&space, &args.omega)?;
    let mut taus = args.tau.clone();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let config = ExperimentConfig {
        q: args.q,
        nu: args.nu,
        kappa: args.kappa,
        taus,
        trials: args.trials,
        seed: globals.seed,
        c_a: args.c_a,
        c_gamma: args.c_gamma,
        estimate_trials: args.estimate_trials,
        alpha: AlphaOptions {
            tol: args.alpha_tol,
            max_rounds: args.max_rounds,
            exec: globals.exec,
            ..AlphaOptions::default()
        },
        tol: args.tol,
        exec: globals.exec,
        ..ExperimentConfig::default()
    };
    let mut report = self_improve_experiment(&domain, args.p, args.p_prime, &config)?;
    let pass = report.rejudge(globals.eps_num);
    let summary = report.summary();
    match io::format_of(args.out.as_deref()) {
        Format::Json => io::write_json(args.out.as_deref(), &report)?,
        Format::Csv => io::write_csv(args.out.as_deref(), &summary)?,
    }
    if let Some(path) = &args.summary {
        io::write_csv(Some(path), &summary)?;
    }
    Ok(pass)
}
