use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::ValueEnum;
use serde::Serialize;

use hardy_core::gen::{self, Pattern, Weights};
use hardy_core::Domain;

use crate::{io, Globals};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Path,
    Cycle,
    Grid,
    GridMinus,
    WalledGrid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    Center,
    Cross,
    Corner,
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Vertex count of a path or cycle.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Removed vertices of `grid-minus`.
    #[arg(long, value_enum, default_value = "center")]
    pattern: Shape,
    /// Random vertex measures in `[LO, HI)`, drawn with the global seed.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    measure: Option<Vec<f64>>,
    /// Wall column of `walled-grid`.
    #[arg(long, default_value_t = 1)]
    wall: usize,
    /// Length of the edges touching the wall.
    #[arg(long, default_value_t = 0.02)]
    wall_edge: f64,
    /// Measure of the wall vertices.
    #[arg(long, default_value_t = 0.1)]
    wall_measure: f64,
    #[arg(long)]
    out_space: PathBuf,
    #[arg(long)]
    out_omega: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    vertices: usize,
    edges: usize,
    omega: usize,
    complement: usize,
    diameter: f64,
    doubling_constant: f64,
}

fn need(v: Option<usize>, flag: &str, kind: Kind) -> Result<usize> {
    match v {
        Some(v) => Ok(v),
        None => bail!("--{flag} is required for {kind:?}"),
    }
}

pub fn run(args: Args, globals: &Globals) -> Result<bool> {
    let weights = Weights {
        measure: args.measure.as_ref().map(|m| (m[0], m[1])),
        seed: globals.seed,
    };
    if let Some((lo, hi)) = weights.measure {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            bail!("--measure needs 0 < LO < HI, got {lo} {hi}");
        }
    }
    let generated = match args.kind {
        Kind::Path => gen::path(need(args.n, "n", args.kind)?, &weights)?,
        Kind::Cycle => gen::cycle(need(args.n, "n", args.kind)?, &weights)?,
        Kind::Grid => gen::grid(need(args.rows, "rows", args.kind)?, need(args.cols, "cols", args.kind)?, &weights)?,
        Kind::GridMinus => {
            let pattern = match args.pattern {
                Shape::Center => Pattern::Center,
                Shape::Cross => Pattern::Cross,
                Shape::Corner => Pattern::Corner,
            };
            gen::grid_minus(need(args.rows, "rows", args.kind)?, need(args.cols, "cols", args.kind)?, pattern, &weights)?
        }
        Kind::WalledGrid => {
            if weights.measure.is_some() {
                bail!("--measure does not apply to walled-grid");
            }
            gen::walled_grid(
                need(args.rows, "rows", args.kind)?,
                need(args.cols, "cols", args.kind)?,
                args.wall,
                args.wall_edge,
                args.wall_measure,
            )?
        }
    };
    let space = &generated.space;
    let domain = Domain::new(space, &generated.omega)?;
    io::write_json(Some(&args.out_space), &space.to_file())?;
    io::write_json(Some(&args.out_omega), &domain.to_file())?;
    let summary = Summary {
        vertices: space.len(),
        edges: space.edges().len(),
        omega: generated.omega.len(),
        complement: space.len() - generated.omega.len(),
        diameter: space.diameter(),
        doubling_constant: space.doubling_constant(),
    };
    io::write_json(None, &summary)?;
    Ok(true)
}
