use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;

use hardy_core::alpha::{alpha_optimize, AlphaOptions, AlphaQuery, AlphaReport};
use hardy_core::{Certificate, EPS_NUM};

use crate::{io, Globals};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    omega: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    nu: f64,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Levels to evaluate; repeat the flag or separate with commas.
    #[arg(long, required = true, value_delimiter = ',')]
    tau: Vec<f64>,
    /// Evaluate at this point instead of the supremum over Ω.
    #[arg(long)]
    x: Option<String>,
    /// Relative cutting-plane gap at which a point counts as converged.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct TauResult {
    tau: f64,
    /// `α <= ν`, which every admissible `g <= 1` satisfies.
    certificate: Certificate,
    estimate: AlphaReport,
}

#[derive(Serialize)]
struct Row {
    tau: f64,
    x: String,
    lower: f64,
    gap: f64,
    upper: f64,
    converged: bool,
    rounds: usize,
}

#[derive(Serialize)]
struct Report {
    kind: &'static str,
    label: &'static str,
    constants: BTreeMap<&'static str, f64>,
    x: Option<String>,
    results: Vec<TauResult>,
    pass: bool,
}

pub fn run(args: Args, globals: &Globals) -> Result<bool> {
    let space = io::load_space(&args.space)?;
    let domain = io::load_domain(&space, &args.omega)?;
    let x = args.x.as_deref().map(|id| io::vertex(&space, id)).transpose()?;
    let mut taus = args.tau.clone();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let opts = AlphaOptions {
        tol: args.tol,
        max_rounds: args.max_rounds,
        exec: globals.exec,
        ..AlphaOptions::default()
    };
    let mut results = Vec::new();
    for &tau in &taus {
        let query = AlphaQuery {
            nu: args.nu,
            kappa: args.kappa,
            tau,
            p: args.p,
            x,
        };
        let est = alpha_optimize(&domain, &query, &opts)?;
        let mut certificate = Certificate::inequality("alpha_bounded", est.value, args.nu, EPS_NUM)
            .with("tau", tau)
            .with("gap", est.gap);
        certificate.note("evidence: the value is an optimizer lower bound");
        if !est.converged {
            certificate.note(format!("not converged after {} rounds", est.rounds));
        }
        certificate.rejudge(globals.eps_num);
        results.push(TauResult {
            tau,
            certificate,
            estimate: est.report(&space),
        });
    }
    let rows: Vec<Row> = results
        .iter()
        .map(|r| Row {
            tau: r.tau,
            x: r.estimate.x.clone(),
            lower: r.estimate.value,
            gap: r.estimate.gap,
            upper: r.estimate.value + r.estimate.gap,
            converged: r.estimate.converged,
            rounds: r.estimate.rounds,
        })
        .collect();
    let pass = results.iter().all(|r| r.certificate.pass);
    let report = Report {
        kind: "alpha",
        label: "evidence",
        constants: BTreeMap::from([
            ("p", args.p),
            ("nu", args.nu),
            ("kappa", args.kappa),
            ("D", space.doubling_constant()),
            ("tol", args.tol),
            ("eps_num", globals.eps_num),
        ]),
        x: args.x,
        results,
        pass,
    };
    io::write_report(args.out.as_deref(), &report, &rows)?;
    Ok(pass)
}
