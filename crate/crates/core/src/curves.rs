//! Discrete curves and minimal line integrals under a length budget.
//!
//! A curve is a walk along edges; `∫_γ g ds` is the per-edge trapezoid rule
//! `ℓ(u,v)·(g(u)+g(v))/2`, so constant fields integrate to arc length.
//! [`min_integral_path`] solves the length-constrained problem
//! `inf { ∫_γ g : γ from source to target, len(γ) <= ν·d(source, target) }`
//! exactly by label setting; [`brute_force_min_path`] is the enumeration
//! oracle for the same infimum.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::certificate::PathWitness;
use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::space::{Domain, Space, Vertex};

/// A nonconstant walk `v_0 v_1 ... v_m` (m >= 1) along edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRec {
    vertices: Vec<Vertex>,
    length: f64,
}

impl PathRec {
    pub fn new(space: &Space, vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(invalid("a curve needs at least two vertices"));
        }
        let mut length = 0.0;
        for w in vertices.windows(2) {
            space.check_vertex(w[0])?;
            space.check_vertex(w[1])?;
            length += space.edge_length(w[0], w[1]).ok_or_else(|| {
                invalid(format!(
                    "`{}` and `{}` are not adjacent",
                    space.id(w[0]),
                    space.id(w[1])
                ))
            })?;
        }
        Ok(PathRec { vertices, length })
    }

    pub fn from_ids(space: &Space, ids: &[&str]) -> Result<Self> {
        let vs = ids.iter().map(|id| space.vertex(id)).collect::<Result<Vec<_>>>()?;
        Self::new(space, vs)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn start(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn end(&self) -> Vertex {
        *self.vertices.last().expect("nonempty")
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.vertices.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// Sub-walk between positions `from..=to`.
    pub fn segment(&self, space: &Space, from: usize, to: usize) -> Result<PathRec> {
        PathRec::new(space, self.vertices[from..=to].to_vec())
    }

    /// Length of the sub-walk between positions `from..=to`.
    pub fn segment_length(&self, space: &Space, from: usize, to: usize) -> f64 {
        self.vertices[from..=to]
            .windows(2)
            .map(|w| space.edge_length(w[0], w[1]).expect("validated path"))
            .sum()
    }

    pub fn witness(&self, space: &Space, g: &Field, label: &str) -> PathWitness {
        PathWitness {
            label: label.to_string(),
            vertices: self.vertices.iter().map(|&v| space.id(v).to_string()).collect(),
            length: self.length,
            integral: path_integral(space, g, self),
        }
    }
}

/// JSON shape of a path report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub vertices: Vec<String>,
    pub length: f64,
    pub integral: f64,
}

impl PathReport {
    pub fn new(space: &Space, g: &Field, path: &PathRec) -> Self {
        PathReport {
            vertices: path.vertices.iter().map(|&v| space.id(v).to_string()).collect(),
            length: path.length,
            integral: path_integral(space, g, path),
        }
    }
}

/// `∫_γ g ds` by the trapezoid rule; repeated edges count with multiplicity.
pub fn path_integral(space: &Space, g: &Field, path: &PathRec) -> f64 {
    path.vertices
        .windows(2)
        .map(|w| edge_integral(space, g, w[0], w[1]))
        .sum()
}

#[inline]
fn edge_integral(space: &Space, g: &Field, u: Vertex, v: Vertex) -> f64 {
    let len = space.edge_length(u, v).expect("validated path");
    len * (g.get(u) + g.get(v)) * 0.5
}

/// Per-vertex weights `c` with `∫_γ g ds = Σ_v c_v g(v)`.
pub fn integral_coefficients(space: &Space, path: &PathRec) -> Vec<f64> {
    let mut c = vec![0.0; space.len()];
    for w in path.vertices.windows(2) {
        let half = 0.5 * space.edge_length(w[0], w[1]).expect("validated path");
        c[w[0]] += half;
        c[w[1]] += half;
    }
    c
}

/// Where a curve family ends: a single vertex or any vertex of a set.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Vertex(Vertex),
    Set(Vec<bool>),
}

impl Target {
    pub fn contains(&self, v: Vertex) -> bool {
        match self {
            Target::Vertex(t) => *t == v,
            Target::Set(mask) => mask[v],
        }
    }

    pub fn complement_of(domain: &Domain<'_>) -> Self {
        Target::Set(domain.complement_mask())
    }

    /// `d(v, target)`.
    pub fn distance(&self, space: &Space, v: Vertex) -> f64 {
        match self {
            Target::Vertex(t) => space.dist(v, *t),
            Target::Set(mask) => space
                .vertices()
                .filter(|&w| mask[w])
                .map(|w| space.dist(v, w))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// The family `Γ^ν_{source,target}` of curves from `source` to `target`
/// of length at most `ν·d(source, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFamilyQuery {
    pub source: Vertex,
    pub target: Target,
    pub nu: f64,
}

impl CurveFamilyQuery {
    pub fn to_vertex(source: Vertex, target: Vertex, nu: f64) -> Self {
        Self {
            source,
            target: Target::Vertex(target),
            nu,
        }
    }

    pub fn to_complement(domain: &Domain<'_>, source: Vertex, nu: f64) -> Self {
        Self {
            source,
            target: Target::complement_of(domain),
            nu,
        }
    }

    fn validate(&self, space: &Space) -> Result<()> {
        space.check_vertex(self.source)?;
        match &self.target {
            Target::Vertex(t) => space.check_vertex(*t)?,
            Target::Set(mask) => {
                if mask.len() != space.len() {
                    return Err(invalid("target mask length does not match the space"));
                }
                if !mask.iter().any(|&b| b) {
                    return Err(invalid("target set is empty"));
                }
            }
        }
        if !(self.nu >= 1.0 && self.nu.is_finite()) {
            return Err(invalid(format!("nu must be >= 1, got {}", self.nu)));
        }
        Ok(())
    }

    /// The length budget `ν·d(source, target)`.
    pub fn budget(&self, space: &Space) -> f64 {
        self.nu * self.target.distance(space, self.source)
    }
}

/// Lengths within this relative slack of the budget are admitted, so that
/// geodesics survive rounding when `ν = 1`.
const BUDGET_SLACK: f64 = 1e-12;

#[inline]
fn within(len: f64, budget: f64) -> bool {
    len <= budget + BUDGET_SLACK * budget.max(1.0)
}

/// A minimizing path and its integral.
#[derive(Debug, Clone, PartialEq)]
pub struct MinPath {
    pub path: PathRec,
    pub value: f64,
}

fn check_weights(space: &Space, g: &Field) -> Result<()> {
    g.check_nonnegative(space, "integrand")
}

fn rank_seq(space: &Space, vs: &[Vertex]) -> Vec<usize> {
    vs.iter().map(|&v| space.id_rank(v)).collect()
}

/// Candidate order: smaller integral, then shorter, then smaller id sequence.
fn candidate_cmp(space: &Space, a: (f64, f64, &[Vertex]), b: (f64, f64, &[Vertex])) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.total_cmp(&b.1))
        .then_with(|| rank_seq(space, a.2).cmp(&rank_seq(space, b.2)))
}

struct Label {
    integral: f64,
    length: f64,
    ranks: Vec<usize>,
    path: Vec<Vertex>,
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Label {}
impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.integral
            .total_cmp(&other.integral)
            .then(self.length.total_cmp(&other.length))
            .then_with(|| self.ranks.cmp(&other.ranks))
    }
}

/// Exact minimum of `∫_γ g` over `Γ^ν_{source,target}` (`g >= 0`).
///
/// Labels are popped in increasing (integral, length, id sequence) order.
/// Because `g >= 0` and edges have positive length, a label at `v` is
/// dominated exactly when an earlier settled label at `v` is no longer, so
/// each vertex keeps only its running minimum settled length. The first
/// settled label at a target vertex is optimal under the same order. Labels
/// whose length plus the remaining distance to the target exceeds the budget
/// are discarded.
pub fn min_integral_path(space: &Space, g: &Field, query: &CurveFamilyQuery) -> Result<MinPath> {
    query.validate(space)?;
    check_weights(space, g)?;
    if query.target.contains(query.source) {
        return Err(Error::Infeasible("source already lies in the target".into()));
    }
    let budget = query.budget(space);
    let n = space.len();
    let lower: Vec<f64> = (0..n).map(|v| query.target.distance(space, v)).collect();
    let mut settled = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Label {
        integral: 0.0,
        length: 0.0,
        ranks: vec![space.id_rank(query.source)],
        path: vec![query.source],
    }));
    while let Some(Reverse(label)) = heap.pop() {
        let v = *label.path.last().expect("nonempty");
        if label.length >= settled[v] {
            continue;
        }
        settled[v] = label.length;
        if query.target.contains(v) {
            let path = PathRec::new(space, label.path)?;
            let value = path_integral(space, g, &path);
            return Ok(MinPath { path, value });
        }
        for &(w, len) in space.neighbors(v) {
            let nl = label.length + len;
            if nl >= settled[w] || !within(nl + lower[w], budget) {
                continue;
            }
            let mut path = label.path.clone();
            path.push(w);
            let mut ranks = label.ranks.clone();
            ranks.push(space.id_rank(w));
            heap.push(Reverse(Label {
                integral: label.integral + len * (g.get(v) + g.get(w)) * 0.5,
                length: nl,
                ranks,
                path,
            }));
        }
    }
    Err(Error::Infeasible(format!(
        "no curve from `{}` within length budget {budget}",
        space.id(query.source)
    )))
}

/// Largest space accepted by [`brute_force_min_path`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Exhaustive search over simple paths: the oracle for [`min_integral_path`].
pub fn brute_force_min_path(space: &Space, g: &Field, query: &CurveFamilyQuery) -> Result<MinPath> {
    if space.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force path search",
            size: space.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    query.validate(space)?;
    check_weights(space, g)?;
    let budget = query.budget(space);
    let mut best: Option<(f64, f64, Vec<Vertex>)> = None;
    let mut stack = vec![query.source];
    let mut on_path = vec![false; space.len()];
    on_path[query.source] = true;
    enumerate_simple(space, g, query, budget, &mut stack, &mut on_path, 0.0, &mut best);
    match best {
        Some((_, _, vs)) => {
            let path = PathRec::new(space, vs)?;
            let value = path_integral(space, g, &path);
            Ok(MinPath { path, value })
        }
        None => Err(Error::Infeasible(format!(
            "no simple curve from `{}` within length budget {budget}",
            space.id(query.source)
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_simple(
    space: &Space,
    g: &Field,
    query: &CurveFamilyQuery,
    budget: f64,
    stack: &mut Vec<Vertex>,
    on_path: &mut [bool],
    length: f64,
    best: &mut Option<(f64, f64, Vec<Vertex>)>,
) {
    let v = *stack.last().expect("nonempty");
    for &(w, len) in space.neighbors(v) {
        if on_path[w] {
            continue;
        }
        let nl = length + len;
        if !within(nl, budget) {
            continue;
        }
        stack.push(w);
        on_path[w] = true;
        if query.target.contains(w) {
            let path = PathRec {
                vertices: stack.clone(),
                length: nl,
            };
            let value = path_integral(space, g, &path);
            let better = match best {
                None => true,
                Some((bv, bl, bp)) => {
                    candidate_cmp(space, (value, nl, stack), (*bv, *bl, bp)) == Ordering::Less
                }
            };
            if better {
                *best = Some((value, nl, stack.clone()));
            }
        }
        enumerate_simple(space, g, query, budget, stack, on_path, nl, best);
        on_path[w] = false;
        stack.pop();
    }
}

/// `u(y) = inf { ∫_σ h : σ from y to Ω^c }` with no length constraint;
/// zero on Ω^c. Multi-source Dijkstra with edge weights `ℓ(h(u)+h(v))/2`.
pub fn inf_connection_potential(domain: &Domain<'_>, h: &Field) -> Result<Field> {
    let space = domain.space();
    h.check_nonnegative(space, "potential weight")?;
    let n = space.len();
    let mut u = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for v in domain.complement() {
        u[v] = 0.0;
        heap.push(Reverse((OrderedFloat(0.0), v)));
    }
    while let Some(Reverse((OrderedFloat(d), v))) = heap.pop() {
        if d > u[v] {
            continue;
        }
        for &(w, len) in space.neighbors(v) {
            let nd = d + len * (h.get(v) + h.get(w)) * 0.5;
            if nd < u[w] {
                u[w] = nd;
                heap.push(Reverse((OrderedFloat(nd), w)));
            }
        }
    }
    Ok(Field::new(u))
}

/// Whether `g` is an upper gradient of `u`: `|u(a) - u(b)| <= ∫_γ g` along
/// every curve. With the trapezoid rule the integral is additive over edges,
/// so checking every single edge is equivalent to checking every curve.
pub fn is_upper_gradient(space: &Space, u: &Field, g: &Field, eps: f64) -> bool {
    space.edges().iter().all(|&(a, b, len)| {
        (u.get(a) - u.get(b)).abs() <= len * (g.get(a) + g.get(b)) * 0.5 + eps
    })
}

/// Every simple path of a small space, for exhaustive checks in tests.
pub fn all_simple_paths(space: &Space) -> Result<Vec<PathRec>> {
    if space.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "simple path enumeration",
            size: space.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    fn walk(space: &Space, stack: &mut Vec<Vertex>, on: &mut [bool], length: f64, out: &mut Vec<PathRec>) {
        let v = *stack.last().expect("nonempty");
        for &(w, len) in space.neighbors(v) {
            if on[w] {
                continue;
            }
            stack.push(w);
            on[w] = true;
            out.push(PathRec {
                vertices: stack.clone(),
                length: length + len,
            });
            walk(space, stack, on, length + len, out);
            on[w] = false;
            stack.pop();
        }
    }
    let mut out = Vec::new();
    for s in space.vertices() {
        let mut on = vec![false; space.len()];
        on[s] = true;
        walk(space, &mut vec![s], &mut on, 0.0, &mut out);
    }
    Ok(out)
}
