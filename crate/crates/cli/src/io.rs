use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use hardy_core::{Domain, Field, Space, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// CSV when the output path ends in `.csv`, JSON otherwise (and on stdout).
pub fn format_of(out: Option<&Path>) -> Format {
    match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
        _ => Format::Json,
    }
}

fn read(path: &Path, what: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {what} file `{}`", path.display()))
}

pub fn load_space(path: &Path) -> Result<Space> {
    let text = read(path, "space")?;
    Space::from_json(&text).with_context(|| format!("invalid space file `{}`", path.display()))
}

pub fn load_domain<'s>(space: &'s Space, path: &Path) -> Result<Domain<'s>> {
    let text = read(path, "omega")?;
    Domain::from_json(space, &text).with_context(|| format!("invalid omega file `{}`", path.display()))
}

pub fn load_field(space: &Space, path: &Path) -> Result<Field> {
    let text = read(path, "field")?;
    Field::from_json(space, &text).with_context(|| format!("invalid field file `{}`", path.display()))
}

pub fn vertex(space: &Space, id: &str) -> Result<Vertex> {
    space.vertex(id).with_context(|| format!("unknown vertex `{id}`"))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("cannot write `{}`", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            Ok(stdout.flush()?)
        }
    }
}

pub fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    emit(out, &bytes)
}

pub fn write_csv<T: Serialize>(out: Option<&Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    emit(out, &w.into_inner()?)
}

/// Writes `report` as JSON, or its `rows` as CSV, depending on `out`.
pub fn write_report<R: Serialize, T: Serialize>(out: Option<&Path>, report: &R, rows: &[T]) -> Result<()> {
    match format_of(out) {
        Format::Json => write_json(out, report),
        Format::Csv => write_csv(out, rows),
    }
}
