use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;

use hardy_core::maximal::{maximal_all, weak_type_check_with, WeakTypeParams};
use hardy_core::Certificate;

use crate::{io, Globals};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    space: PathBuf,
    /// Field file with the function `f`.
    #[arg(long)]
    f: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Restriction radius; 0 gives `|f|`.
    #[arg(long)]
    r: f64,
    /// Report a single point.
    #[arg(long)]
    x: Option<String>,
    /// Check the weak-type estimate for `E = {M_{p,s} f > λ}` at this level.
    #[arg(long, requires = "s")]
    lambda: Option<f64>,
    #[arg(long, requires = "lambda")]
    s: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    x: String,
    value: f64,
    weak_lhs: Option<f64>,
    weak_rhs: Option<f64>,
    pass: bool,
}

#[derive(Serialize)]
struct Report {
    kind: &'static str,
    constants: BTreeMap<&'static str, f64>,
    rows: Vec<Row>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    weak_type: Vec<Certificate>,
    pass: bool,
}

pub fn run(args: Args, globals: &Globals) -> Result<bool> {
    let space = io::load_space(&args.space)?;
    let f = io::load_field(&space, &args.f)?;
    let values = maximal_all(&space, &f, args.p, args.r)?;
    let points: Vec<_> = match &args.x {
        Some(id) => vec![io::vertex(&space, id)?],
        None => space.vertices().collect(),
    };
    let doubling = space.doubling_constant();
    let mut constants = BTreeMap::from([("p", args.p), ("r", args.r), ("D", doubling), ("eps_num", globals.eps_num)]);
    let mut rows = Vec::new();
    let mut weak_type = Vec::new();
    for &x in &points {
        let mut row = Row {
            x: space.id(x).to_string(),
            value: values[x],
            weak_lhs: None,
            weak_rhs: None,
            pass: true,
        };
        if let (Some(lambda), Some(s)) = (args.lambda, args.s) {
            let params = WeakTypeParams { q: args.p, r: args.r, s, lambda };
            let mut cert = weak_type_check_with(&space, &f, &params, x, doubling)?;
            cert.note(format!("x = `{}`", space.id(x)));
            cert.rejudge(globals.eps_num);
            row.weak_lhs = Some(cert.lhs);
            row.weak_rhs = Some(cert.rhs);
            row.pass = cert.pass;
            weak_type.push(cert);
        }
        rows.push(row);
    }
    if let (Some(lambda), Some(s)) = (args.lambda, args.s) {
        constants.insert("lambda", lambda);
        constants.insert("s", s);
    }
    let pass = rows.iter().all(|r| r.pass);
    let report = Report {
        kind: "maximal",
        constants,
        rows,
        weak_type,
        pass,
    };
    io::write_report(args.out.as_deref(), &report, &report.rows)?;
    Ok(pass)
}
