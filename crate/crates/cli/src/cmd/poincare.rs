use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::Serialize;

use hardy_core::certificate::holds;
use hardy_core::poincare::{ca_upper_bound, two_point_table, CurveCharParams, PairRow};
use hardy_core::selfimprove::experiment::ConstantSource;

use super::{candidates, max_ratio, worst_rows};
use crate::{io, Globals};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    nu: f64,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Constant to check against; the sampled maximum when omitted.
    #[arg(long)]
    c_a: Option<f64>,
    /// Gradient field with values in [0, 1].
    #[arg(long, conflicts_with = "trials")]
    g: Option<PathBuf>,
    /// Number of sampled gradient fields.
    #[arg(long, default_value_t = 16)]
    trials: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub x: String,
    pub y: String,
    pub sample: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub path_length: f64,
    pub pass: bool,
}

#[derive(Serialize)]
struct Report {
    kind: &'static str,
    label: &'static str,
    constants: BTreeMap<&'static str, f64>,
    c_a_source: ConstantSource,
    candidates: usize,
    rows: Vec<Row>,
    violations: Vec<String>,
    pass: bool,
}

pub fn run(args: Args, globals: &Globals) -> Result<bool> {
    let space = io::load_space(&args.space)?;
    if let Some(c) = args.c_a {
        if !(c > 0.0 && c.is_finite()) {
            bail!("--c-a must be positive, got {c}");
        }
    }
    let cands = candidates(&space, None, args.g.as_deref(), args.trials, globals.seed)?;
    if cands.is_empty() {
        bail!("--trials must be at least 1");
    }
    // With C_A = 1 the table's rhs is the bare right-hand side.
    let unit = CurveCharParams {
        p: args.p,
        c_a: 1.0,
        nu: args.nu,
        kappa: args.kappa,
    };
    let tables = cands
        .iter()
        .map(|c| two_point_table(&space, &c.g, &unit, globals.exec))
        .collect::<hardy_core::Result<Vec<Vec<PairRow>>>>()?;
    let worst = worst_rows(&tables, |r| r.ratio);
    let estimate = max_ratio(worst.iter().map(|(_, r)| &r.ratio));
    let (c_a, source) = match args.c_a {
        Some(c) => (c, ConstantSource::Given),
        None => (estimate, ConstantSource::Estimated),
    };
    let rows: Vec<Row> = worst
        .into_iter()
        .map(|(c, r)| {
            let rhs = c_a * r.rhs;
            Row {
                pass: holds(r.lhs, rhs, globals.eps_num),
                x: r.x,
                y: r.y,
                sample: cands[c].label.clone(),
                lhs: r.lhs,
                rhs,
                ratio: r.ratio,
                path_length: r.path_length,
            }
        })
        .collect();
    let violations: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{}-{}", r.x, r.y)).collect();
    let pass = violations.is_empty();
    let mut constants = BTreeMap::from([
        ("p", args.p),
        ("nu", args.nu),
        ("kappa", args.kappa),
        ("C_A", c_a),
        ("C_A_sampled", estimate),
        ("D", space.doubling_constant()),
        ("eps_num", globals.eps_num),
    ]);
    if args.kappa > 1.0 {
        constants.insert("C_A_certified", ca_upper_bound(&space, args.kappa)?);
    }
    let report = Report {
        kind: "poincare_two_point",
        label: "sampled",
        constants,
        c_a_source: source,
        candidates: cands.len(),
        rows,
        violations,
        pass,
    };
    io::write_report(args.out.as_deref(), &report, &report.rows)?;
    Ok(pass)
}
