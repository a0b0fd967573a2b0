use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::Serialize;

use hardy_core::certificate::holds;
use hardy_core::hardy::{cgamma_upper_bound, hardy_char_restricted, hardy_curve_char, hardy_table, HardyCharParams, HardyRow};
use hardy_core::selfimprove::experiment::ConstantSource;
use hardy_core::{Certificate, Field};

use super::{candidates, max_ratio, worst_rows};
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
    /// Constant to check against; the sampled maximum when omitted.
    #[arg(long, alias = "c-gamma")]
    c_h: Option<f64>,
    /// Gradient field.
    #[arg(long, conflicts_with = "trials")]
    g: Option<PathBuf>,
    /// Number of sampled gradient fields.
    #[arg(long, default_value_t = 16)]
    trials: u64,
    /// Only gradients vanishing outside Ω: a given field must, sampled ones
    /// are cut off.
    #[arg(long)]
    restricted: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub x: String,
    pub sample: String,
    pub d: f64,
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
    c_h_source: ConstantSource,
    candidates: usize,
    rows: Vec<Row>,
    /// Full certificates at the violating points.
    violations: Vec<Certificate>,
    pass: bool,
}

pub fn run(args: Args, globals: &Globals) -> Result<bool> {
    let space = io::load_space(&args.space)?;
    let domain = io::load_domain(&space, &args.omega)?;
    if let Some(c) = args.c_h {
        if !(c > 0.0 && c.is_finite()) {
            bail!("--c-h must be positive, got {c}");
        }
    }
    let mut cands = candidates(&space, Some(&domain), args.g.as_deref(), args.trials, globals.seed)?;
    if cands.is_empty() {
        bail!("--trials must be at least 1");
    }
    if args.restricted && args.g.is_some() {
        if let Some(v) = domain.complement().find(|&v| cands[0].g.get(v) != 0.0) {
            bail!("--restricted needs g = 0 outside Ω, g(`{}`) = {}", space.id(v), cands[0].g.get(v));
        }
    } else if args.restricted {
        for c in &mut cands {
            c.g = Field::from_fn(space.len(), |v| if domain.contains(v) { c.g.get(v) } else { 0.0 });
        }
    }
    let unit = HardyCharParams {
        p: args.p,
        c_gamma: 1.0,
        nu: args.nu,
        kappa: args.kappa,
    };
    let tables = cands
        .iter()
        .map(|c| hardy_table(&domain, &c.g, &unit, globals.exec))
        .collect::<hardy_core::Result<Vec<Vec<HardyRow>>>>()?;
    let worst = worst_rows(&tables, |r| r.ratio);
    let estimate = max_ratio(worst.iter().map(|(_, r)| &r.ratio));
    let (c_h, source) = match args.c_h {
        Some(c) => (c, ConstantSource::Given),
        None => (estimate, ConstantSource::Estimated),
    };
    let params = HardyCharParams { c_gamma: c_h, ..unit };

    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (c, r) in worst {
        let rhs = c_h * r.rhs;
        let pass = holds(r.lhs, rhs, globals.eps_num);
        if !pass {
            let x = io::vertex(&space, &r.x)?;
            let g = &cands[c].g;
            let mut cert = if args.restricted {
                hardy_char_restricted(&domain, g, &params, x)?
            } else {
                hardy_curve_char(&domain, g, &params, x)?
            };
            cert.note(format!("g = {}", cands[c].label));
            cert.rejudge(globals.eps_num);
            violations.push(cert);
        }
        rows.push(Row {
            x: r.x,
            sample: cands[c].label.clone(),
            d: r.d,
            lhs: r.lhs,
            rhs,
            ratio: r.ratio,
            path_length: r.path_length,
            pass,
        });
    }
    let pass = violations.is_empty();
    let mut constants = BTreeMap::from([
        ("p", args.p),
        ("nu", args.nu),
        ("kappa", args.kappa),
        ("C_H", c_h),
        ("C_H_sampled", estimate),
        ("D", space.doubling_constant()),
        ("eps_num", globals.eps_num),
    ]);
    if args.kappa > 1.0 {
        constants.insert("C_H_certified", cgamma_upper_bound(&domain, args.kappa)?);
    }
    let report = Report {
        kind: if args.restricted { "hardy_curve_restricted" } else { "hardy_curve" },
        label: "sampled",
        constants,
        c_h_source: source,
        candidates: cands.len(),
        rows,
        violations,
        pass,
    };
    io::write_report(args.out.as_deref(), &report, &report.rows)?;
    Ok(pass)
}
