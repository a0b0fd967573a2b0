use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, EPS_NUM};
use crate::curves::{path_integral, PathRec};
use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::space::Domain;

use super::params::ImprovementParams;

/// A maximal run of base-path vertices inside `E_{i0}`, given by the path
/// indices of its flanking vertices `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub a: usize,
    pub b: usize,
    /// `d(γ_0(a), γ_0(b))`.
    pub d: f64,
    /// Length of the base path between the flanks.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapDecomposition {
    pub base_path: PathRec,
    pub i0: u64,
    /// Index ranges `[s, t]` of the base path that are kept as they are.
    pub kept_segments: Vec<(usize, usize)>,
    /// Gaps whose flanks both lie in `Ω \ E_{i0}`.
    pub gaps: Vec<Gap>,
    /// The gap running into the terminal vertex, if any.
    pub final_gap: Option<Gap>,
    /// Runs whose flanks coincide: the loop between them is cut out.
    pub excised: Vec<(usize, usize)>,
    /// `Σ d_i` over all gaps including the final one.
    pub distance_sum: f64,
    /// `δ M^{-i0 q/p} d(x,Ω^c)`.
    pub bound: f64,
}

impl GapDecomposition {
    pub fn certificate(&self) -> Certificate {
        let mut c = Certificate::inequality("gap_distance_sum", self.distance_sum, self.bound, EPS_NUM)
            .with("i0", self.i0 as f64)
            .with("gaps", self.gaps.len() as f64)
            .with("final_gap", if self.final_gap.is_some() { 1.0 } else { 0.0 });
        if !self.excised.is_empty() {
            c.note(format!("{} degenerate run(s) excised", self.excised.len()));
        }
        c
    }
}

/// Trapezoid length of the base path spent inside `E`, and the length of
/// the edges with at least one endpoint in `E`.
pub fn level_usage(domain: &Domain<'_>, path: &PathRec, e: &[bool]) -> (f64, f64) {
    let space = domain.space();
    let integral = path_integral(space, &Field::indicator(e), path);
    let touched = path
        .vertices()
        .windows(2)
        .filter(|w| e[w[0]] || e[w[1]])
        .map(|w| space.edge_length(w[0], w[1]).expect("path edge"))
        .sum();
    (integral, touched)
}

/// Splits `gamma0` at the maximal runs of vertices in `E_{i0}`.
///
/// Every vertex but the last must lie in Ω, the last in Ω^c, and the start
/// `x` outside `E_{i0}`. A run reaching the vertex before the terminal one
/// is the final gap, with the terminal vertex as its right flank.
pub fn gap_decompose(domain: &Domain<'_>, gamma0: &PathRec, e_i0: &[bool], i0: u64, params: &ImprovementParams) -> Result<GapDecomposition> {
    let space = domain.space();
    if e_i0.len() != space.len() {
        return Err(invalid("level set mask length does not match the space"));
    }
    let vs = gamma0.vertices();
    let last = vs.len() - 1;
    let x = vs[0];
    let d = domain.dist_to_complement(x)?;
    if vs[..last].iter().any(|&v| !domain.contains(v)) || domain.contains(vs[last]) {
        return Err(invalid("base path must stay in Ω until its terminal vertex in Ω^c"));
    }
    if e_i0[x] {
        return Err(Error::Precondition(format!("start vertex `{}` lies in E_i0", space.id(x))));
    }
    if let Some(v) = (0..space.len()).find(|&v| e_i0[v] && !domain.contains(v)) {
        return Err(invalid(format!("E_i0 must lie in Ω, found `{}`", space.id(v))));
    }
    let bound = params.level_budget(i0, d);
    let (usage, _) = level_usage(domain, gamma0, e_i0);
    if usage > bound + EPS_NUM {
        return Err(Error::Precondition(format!(
            "base path spends {usage} in E_i0, above δ M^(-i0 q/p) d = {bound}"
        )));
    }

    let mut gaps = Vec::new();
    let mut excised = Vec::new();
    let mut final_gap = None;
    let mut cuts: Vec<(usize, usize)> = Vec::new();
    let mut i = 1;
    while i < last {
        if !e_i0[vs[i]] {
            i += 1;
            continue;
        }
        let start = i;
        while i < last && e_i0[vs[i]] {
            i += 1;
        }
        let (a, b) = (start - 1, i);
        let gap = Gap {
            a,
            b,
            d: space.dist(vs[a], vs[b]),
            length: gamma0.segment_length(space, a, b),
        };
        if b == last {
            final_gap = Some(gap);
        } else if vs[a] == vs[b] {
            excised.push((a, b));
        } else {
            gaps.push(gap);
        }
        cuts.push((a, b));
    }
    let mut kept_segments = Vec::new();
    let mut from = 0;
    for &(a, b) in &cuts {
        kept_segments.push((from, a));
        from = b;
    }
    if final_gap.is_none() {
        kept_segments.push((from, last));
    }
    let distance_sum = gaps.iter().chain(final_gap.iter()).map(|g| g.d).sum();
    Ok(GapDecomposition {
        base_path: gamma0.clone(),
        i0,
        kept_segments,
        gaps,
        final_gap,
        excised,
        distance_sum,
        bound,
    })
}
