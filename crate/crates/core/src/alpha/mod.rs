//! The α-function
//!
//! ```text
//! α_p(ν, κ, τ) = sup_{x ∈ Ω} sup_{g} inf_{γ ∈ Γ^ν_{x,Ω^c}} ∫_γ g ds / d(x,Ω^c)
//! ```
//!
//! over `g: X → [0, 1]` with `M_{p,κ d(x,Ω^c)} g(x) <= τ`. For fixed `x` the
//! feasible set is convex and the objective is a minimum of linear
//! functionals, so [`alpha_optimize`] runs a cutting-plane loop: an
//! interior-point solve over the active paths gives an upper bound and a
//! candidate `g`; a minimal-integral path search for that `g` gives a
//! certified lower bound and, if it undercuts the relaxation, a new path.

pub mod brute;
pub mod inner;

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, EPS_NUM};
use crate::curves::{min_integral_path, path_integral, CurveFamilyQuery, PathRec, PathReport};
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::field::Field;
use crate::maximal::{check_exponent, maximal_powered, powered};
use crate::poincare::check_nu_kappa;
use crate::space::{Domain, Space, Vertex};

pub use brute::{alpha_brute, AlphaBruteProfile};
use inner::{BallConstraint, InnerOptions, InnerProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaQuery {
    pub nu: f64,
    pub kappa: f64,
    pub tau: f64,
    pub p: f64,
    /// `None` takes the supremum over `x ∈ Ω`.
    pub x: Option<Vertex>,
}

impl AlphaQuery {
    pub fn validate(&self, domain: &Domain<'_>) -> Result<()> {
        check_exponent(self.p)?;
        check_nu_kappa(self.nu, self.kappa)?;
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        if let Some(x) = self.x {
            domain.dist_to_complement(x)?;
        }
        Ok(())
    }

    pub fn at(self, x: Vertex) -> Self {
        Self { x: Some(x), ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaOptions {
    /// Stop once `upper - lower <= tol · max(1, upper)`.
    pub tol: f64,
    pub max_rounds: usize,
    pub exec: Exec,
    /// Extra candidates; each one that is feasible at the queried point is
    /// evaluated and its minimal path joins the active set.
    pub seeds: Vec<Field>,
    pub inner: InnerOptions,
}

impl Default for AlphaOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_rounds: 100,
            exec: Exec::default(),
            seeds: Vec::new(),
            inner: InnerOptions::default(),
        }
    }
}

/// Result of [`alpha_optimize`]: a certified lower bound (`value`, attained
/// by `witness_g`) and the remaining cutting-plane gap.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaEstimate {
    pub value: f64,
    pub x: Vertex,
    pub witness_g: Field,
    pub witness_path: PathRec,
    pub active_paths: Vec<PathRec>,
    pub converged: bool,
    pub gap: f64,
    pub rounds: usize,
}

impl AlphaEstimate {
    /// Lower bound plus gap: an upper estimate for the sup at this point.
    pub fn upper(&self) -> f64 {
        self.value + self.gap
    }

    pub fn report(&self, space: &Space) -> AlphaReport {
        AlphaReport {
            value: self.value,
            gap: self.gap,
            converged: self.converged,
            rounds: self.rounds,
            x: space.id(self.x).to_string(),
            witness_g: self.witness_g.to_file(space).values,
            witness_path: PathReport::new(space, &self.witness_g, &self.witness_path),
            active_paths: self
                .active_paths
                .iter()
                .map(|p| PathReport::new(space, &self.witness_g, p))
                .collect(),
        }
    }
}

/// Serializable form of an [`AlphaEstimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub value: f64,
    pub gap: f64,
    pub converged: bool,
    pub rounds: usize,
    pub x: String,
    pub witness_g: std::collections::BTreeMap<String, f64>,
    pub witness_path: PathReport,
    pub active_paths: Vec<PathReport>,
}

/// The admissible balls at `x` and the feasibility test for one point.
pub(crate) struct PointSetup<'d, 's> {
    pub domain: &'d Domain<'s>,
    pub x: Vertex,
    pub d: f64,
    pub p: f64,
    pub nu: f64,
    pub kappa: f64,
    pub balls: Vec<(Vec<Vertex>, f64)>,
}

impl<'d, 's> PointSetup<'d, 's> {
    pub fn new(domain: &'d Domain<'s>, x: Vertex, p: f64, nu: f64, kappa: f64) -> Result<Self> {
        let space = domain.space();
        let d = domain.dist_to_complement(x)?;
        let balls = space
            .enumerate_distinct_balls(x, kappa * d)?
            .into_iter()
            .map(|b| {
                let m = b.measure(space);
                (b.members, m)
            })
            .collect();
        Ok(Self {
            domain,
            x,
            d,
            p,
            nu,
            kappa,
            balls,
        })
    }

    pub fn space(&self) -> &'s Space {
        self.domain.space()
    }

    /// `M_{p,κd} g(x)`.
    pub fn level(&self, g: &Field) -> f64 {
        maximal_powered(self.space(), &powered(g, self.p), self.p, self.kappa * self.d, self.x)
    }

    /// Vertices lying in some admissible ball: the ones forced to zero at
    /// `τ = 0`.
    pub fn covered(&self) -> Vec<bool> {
        let mut mask = vec![false; self.space().len()];
        for (members, _) in &self.balls {
            for &v in members {
                mask[v] = true;
            }
        }
        mask
    }

    pub fn query(&self) -> CurveFamilyQuery {
        CurveFamilyQuery::to_complement(self.domain, self.x, self.nu)
    }

    pub fn min_path(&self, g: &Field) -> Result<crate::curves::MinPath> {
        min_integral_path(self.space(), g, &self.query())
    }
}

/// Per-point cutting-plane loop.
fn optimize_at(domain: &Domain<'_>, q: &AlphaQuery, x: Vertex, opts: &AlphaOptions) -> Result<AlphaEstimate> {
    let setup = PointSetup::new(domain, x, q.p, q.nu, q.kappa)?;
    let space = domain.space();
    let n = space.len();
    let tau = q.tau;
    let d = setup.d;
    let fixed = if tau == 0.0 { setup.covered() } else { vec![false; n] };
    let cap = tau.min(1.0);

    let mut active: Vec<PathRec> = Vec::new();
    let push_path = |active: &mut Vec<PathRec>, p: PathRec| {
        if !active.contains(&p) {
            active.push(p);
        }
    };
    // Geodesic start plus the constant candidate min(τ, 1); at τ = 0 it is 1
    // off the admissible balls and 0 on them.
    let geodesic = setup.min_path(&Field::constant(n, 1.0))?.path;
    push_path(&mut active, geodesic.clone());

    let constant = Field::from_fn(n, |v| {
        if fixed[v] {
            0.0
        } else if tau == 0.0 {
            1.0
        } else {
            cap
        }
    });
    let first = setup.min_path(&constant)?;
    let mut best = (first.value, constant, first.path.clone());
    push_path(&mut active, first.path);
    for seed in &opts.seeds {
        seed.check_gradient(space)?;
        if setup.level(seed) <= tau + EPS_NUM {
            let mp = setup.min_path(seed)?;
            if mp.value > best.0 {
                best = (mp.value, seed.clone(), mp.path.clone());
            }
            push_path(&mut active, mp.path);
        }
    }

    let mut upper = f64::INFINITY;
    let mut converged = false;
    let mut rounds = 0;
    let mut state = Relaxation::new(n, setup.balls.len());
    while rounds < opts.max_rounds {
        rounds += 1;
        let (free, sol) = solve_relaxation(&setup, &active, &fixed, tau, &opts.inner, &mut state);
        upper = upper.min(sol.upper);
        let mut g = vec![0.0; n];
        for (k, &v) in free.iter().enumerate() {
            g[v] = sol.g[k].clamp(0.0, 1.0);
        }
        let raw = Field::new(g);
        let g = lift(&setup, raw.clone(), &free, &fixed, tau);
        let mp = setup.min_path(&g)?;
        if mp.value > best.0 && setup.level(&g) <= tau + EPS_NUM {
            best = (mp.value, g.clone(), mp.path.clone());
        }
        if upper - best.0 <= opts.tol * d * (upper / d).max(1.0) {
            converged = true;
            break;
        }
        // Two cuts per round: the path that undercuts the lifted candidate,
        // and the one that undercuts the relaxation itself, which tends to
        // bring new vertices into play.
        let before = active.len();
        push_path(&mut active, mp.path.clone());
        push_path(&mut active, setup.min_path(&raw)?.path);
        // Further cuts from paths that avoid the ones just found.
        let mut penalized = g.clone();
        let mut last = mp.path;
        for _ in 0..EXTRA_CUTS {
            for &v in &last.vertices()[1..] {
                penalized.values_mut()[v] += 1.0;
            }
            last = setup.min_path(&penalized)?.path;
            push_path(&mut active, last.clone());
        }
        if active.len() == before {
            break;
        }
    }

    let (raw, witness_g, witness_path) = best;
    // Re-verify the witness independently of the solver.
    let level = setup.level(&witness_g);
    if level > tau + EPS_NUM {
        return Err(Error::Infeasible(format!(
            "alpha witness violates the ball constraint: {level} > {tau}"
        )));
    }
    let value = path_integral(space, &witness_g, &witness_path) / d;
    debug_assert!((value - raw / d).abs() <= 1e-12 * value.max(1.0));
    let gap = ((upper / d) - value).max(0.0);
    Ok(AlphaEstimate {
        value,
        x,
        witness_g,
        witness_path,
        active_paths: active,
        converged,
        gap,
        rounds,
    })
}

/// State carried between cutting-plane rounds: the last solution by vertex
/// and which admissible balls have been binding.
struct Relaxation {
    g: Vec<Option<f64>>,
    working: Vec<bool>,
}

impl Relaxation {
    fn new(n: usize, balls: usize) -> Self {
        Self {
            g: vec![None; n],
            working: vec![false; balls],
        }
    }
}

/// Builds and solves the relaxation over the vertices of the active paths.
fn solve_relaxation(
    setup: &PointSetup<'_, '_>,
    active: &[PathRec],
    fixed: &[bool],
    tau: f64,
    inner_opts: &InnerOptions,
    state: &mut Relaxation,
) -> (Vec<Vertex>, inner::InnerSolution) {
    let space = setup.space();
    let n = space.len();
    let mut index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for path in active {
        for &v in path.vertices() {
            if !fixed[v] && index[v] == usize::MAX {
                index[v] = free.len();
                free.push(v);
            }
        }
    }
    let rows: Vec<Vec<f64>> = active
        .iter()
        .map(|path| {
            let coeff = crate::curves::integral_coefficients(space, path);
            free.iter().map(|&v| coeff[v]).collect()
        })
        .collect();
    if free.is_empty() || rows.iter().any(|r| r.iter().all(|&c| c == 0.0)) {
        return (
            free.clone(),
            inner::InnerSolution {
                g: vec![0.0; free.len()],
                value: 0.0,
                upper: 0.0,
            },
        );
    }
    let tp = tau.powf(setup.p);
    let mut seen = std::collections::BTreeMap::<Vec<usize>, (f64, usize)>::new();
    for (j, (members, measure)) in setup.balls.iter().enumerate() {
        let restricted: Vec<usize> = members.iter().filter(|&&v| index[v] != usize::MAX).map(|&v| index[v]).collect();
        if restricted.is_empty() {
            continue;
        }
        let rhs = tp * measure;
        // A constraint that even g ≡ 1 satisfies can never bind.
        let full: f64 = restricted.iter().map(|&i| space.measure(free[i])).sum();
        if full <= rhs {
            continue;
        }
        let e = seen.entry(restricted).or_insert((rhs, j));
        if rhs < e.0 {
            *e = (rhs, j);
        }
    }
    let (all, source): (Vec<BallConstraint>, Vec<usize>) = seen
        .into_iter()
        .map(|(members, (rhs, j))| {
            (
                BallConstraint {
                    weights: members.iter().map(|&i| space.measure(free[i])).collect(),
                    members,
                    rhs,
                },
                j,
            )
        })
        .unzip();
    let start = if tau == 0.0 { 0.5 } else { 0.5 * tau.min(1.0) };
    // Constraint generation: most balls never bind, so solve over a working
    // set and add the ones the solution violates. Dropping constraints only
    // enlarges the feasible set, so every intermediate upper bound is valid.
    let mut working: Vec<bool> = source.iter().map(|&j| state.working[j]).collect();
    let mut prob = InnerProblem {
        n: free.len(),
        p: setup.p,
        paths: rows,
        balls: all.iter().zip(&working).filter(|(_, &w)| w).map(|(b, _)| b.clone()).collect(),
        // At τ = 0 the free vertices lie outside every admissible ball.
        start,
    };
    let mut warm: Vec<f64> = free.iter().map(|&v| state.g[v].unwrap_or(start)).collect();
    loop {
        let sol = prob.solve_from(Some(&warm), inner_opts);
        let violated: Vec<usize> = all
            .iter()
            .enumerate()
            .filter(|(j, b)| !working[*j] && inner::ball_sum(b, &sol.g, setup.p) - b.rhs >= -NEAR_ACTIVE * b.rhs)
            .map(|(j, _)| j)
            .collect();
        let strictly = violated.iter().any(|&j| inner::ball_sum(&all[j], &sol.g, setup.p) >= all[j].rhs);
        if !strictly {
            for (k, &v) in free.iter().enumerate() {
                state.g[v] = Some(sol.g[k]);
            }
            for (j, &w) in working.iter().enumerate() {
                if w {
                    state.working[source[j]] = true;
                }
            }
            return (free, sol);
        }
        for &j in &violated {
            working[j] = true;
            prob.balls.push(all[j].clone());
        }
        warm.clone_from(&sol.g);
    }
}

const EXTRA_CUTS: usize = 3;

/// Balls within this relative slack of binding join the working set too.
const NEAR_ACTIVE: f64 = 0.0;

/// Raises the vertices outside the relaxation to the largest common value
/// that keeps `g` feasible. This never lowers any path integral.
fn lift(setup: &PointSetup<'_, '_>, g: Field, free: &[Vertex], fixed: &[bool], tau: f64) -> Field {
    let n = g.len();
    let mut outside = vec![true; n];
    for &v in free {
        outside[v] = false;
    }
    for v in 0..n {
        if fixed[v] {
            outside[v] = false;
        }
    }
    if !outside.iter().any(|&b| b) || setup.level(&g) > tau {
        return g;
    }
    let with = |lam: f64| Field::from_fn(n, |v| if outside[v] { lam } else { g.get(v) });
    let top = with(1.0);
    if setup.level(&top) <= tau {
        return top;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if setup.level(&with(mid)) <= tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    with(lo)
}

/// Cutting-plane estimate of `α_p(ν, κ, τ)`, at `query.x` or maximized over
/// `x ∈ Ω` (independent runs, max-merged in vertex order).
pub fn alpha_optimize(domain: &Domain<'_>, query: &AlphaQuery, opts: &AlphaOptions) -> Result<AlphaEstimate> {
    query.validate(domain)?;
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tol must be positive, got {}", opts.tol)));
    }
    let points: Vec<Vertex> = match query.x {
        Some(x) => vec![x],
        None => domain.omega().collect(),
    };
    let runs = opts.exec.try_map(&points, |&x| optimize_at(domain, query, x, opts))?;
    let mut runs = runs.into_iter();
    let mut best = runs.next().expect("Ω is nonempty");
    let mut all_converged = best.converged;
    let mut max_upper = best.upper();
    for r in runs {
        all_converged &= r.converged;
        max_upper = max_upper.max(r.upper());
        if r.value > best.value {
            best = r;
        }
    }
    best.converged = all_converged;
    best.gap = (max_upper - best.value).max(0.0);
    Ok(best)
}

/// Checks `inf_γ ∫_γ g <= d(x,Ω^c) · α(ν, κ, M_{p,κd} g(x))`, with α
/// replaced by the optimizer's lower bound plus gap at `x` (seeded with `g`
/// itself, which is feasible by construction).
pub fn alpha_rewrite_bound(
    domain: &Domain<'_>,
    g: &Field,
    x: Vertex,
    nu: f64,
    kappa: f64,
    p: f64,
    opts: &AlphaOptions,
) -> Result<Certificate> {
    let space = domain.space();
    g.check_gradient(space)?;
    let setup = PointSetup::new(domain, x, p, nu, kappa)?;
    check_nu_kappa(nu, kappa)?;
    let tau = setup.level(g);
    let lhs = setup.min_path(g)?;
    let mut o = opts.clone();
    o.seeds.push(g.clone());
    let est = alpha_optimize(domain, &AlphaQuery { nu, kappa, tau, p, x: Some(x) }, &o)?;
    let mut cert = Certificate::inequality("alpha_rewrite", lhs.value, setup.d * est.upper(), EPS_NUM)
        .with("tau", tau)
        .with("d", setup.d)
        .with("alpha_lower", est.value)
        .with("alpha_gap", est.gap)
        .with("nu", nu)
        .with("kappa", kappa)
        .with("p", p);
    cert.witnesses.push(lhs.path.witness(space, g, "minimal curve"));
    Ok(cert)
}

/// Falsification test for `α(ν, κ, τ) <= C_α τ` on a grid of τ: each lower
/// bound exceeding `C_α τ` refutes linear growth; passing is evidence only.
pub fn alpha_linear_criterion(
    domain: &Domain<'_>,
    nu: f64,
    kappa: f64,
    p: f64,
    c_alpha: f64,
    tau_grid: &[f64],
    opts: &AlphaOptions,
) -> Result<Certificate> {
    if tau_grid.is_empty() {
        return Err(invalid("tau grid must be nonempty"));
    }
    let mut cert = Certificate::aggregate("alpha_linear").with("C_alpha", c_alpha);
    cert.note("evidence: optimizer lower bounds can refute but not prove linear growth");
    let mut worst = f64::NEG_INFINITY;
    for &tau in tau_grid {
        let est = alpha_optimize(domain, &AlphaQuery { nu, kappa, tau, p, x: None }, opts)?;
        let rhs = c_alpha * tau;
        let mut stage = Certificate::inequality("alpha_linear_tau", est.value, rhs, EPS_NUM)
            .with("tau", tau)
            .with("gap", est.gap)
            .with("converged", est.converged as u8 as f64);
        stage.note(format!("x = `{}`", domain.space().id(est.x)));
        worst = worst.max(stage.lhs - stage.rhs);
        cert.push_stage(stage);
    }
    cert.lhs = worst.max(0.0);
    cert.set("worst_excess", worst);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Space {
        Space::new(
            (0..n).map(|i| (format!("v{i}"), 1.0)).collect(),
            (0..n - 1).map(|i| (format!("v{i}"), format!("v{}", i + 1), 1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn tau_zero_with_large_kappa() {
        let s = path(4);
        let dom = Domain::new(&s, &[0, 1, 2]).unwrap();
        let q = AlphaQuery { nu: 2.0, kappa: 2.0, tau: 0.0, p: 2.0, x: Some(0) };
        let est = alpha_optimize(&dom, &q, &AlphaOptions::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.converged);
    }

    #[test]
    fn large_tau_reaches_geodesic_bound() {
        let s = path(4);
        let dom = Domain::new(&s, &[0, 1, 2]).unwrap();
        let q = AlphaQuery { nu: 2.0, kappa: 1.0, tau: 1.0, p: 2.0, x: Some(0) };
        let est = alpha_optimize(&dom, &q, &AlphaOptions::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-6, "{}", est.value);
        assert!(est.value <= q.nu + 1e-6);
    }

    #[test]
    fn lower_bound_at_least_constant_candidate() {
        let s = path(5);
        let dom = Domain::new(&s, &[0, 1, 2, 3]).unwrap();
        for tau in [0.05, 0.2, 0.5] {
            let q = AlphaQuery { nu: 1.5, kappa: 1.0, tau, p: 1.5, x: None };
            let est = alpha_optimize(&dom, &q, &AlphaOptions::default()).unwrap();
            assert!(est.value >= tau - 1e-9);
            assert!(est.value <= q.nu + 1e-6);
            let setup = PointSetup::new(&dom, est.x, q.p, q.nu, q.kappa).unwrap();
            assert!(setup.level(&est.witness_g) <= tau + EPS_NUM);
        }
    }

    #[test]
    fn rewrite_and_linear() {
        let s = path(4);
        let dom = Domain::new(&s, &[0, 1, 2]).unwrap();
        let g = Field::new(vec![0.0, 0.3, 0.9, 1.0]);
        let c = alpha_rewrite_bound(&dom, &g, 0, 2.0, 1.0, 2.0, &AlphaOptions::default()).unwrap();
        assert!(c.pass, "{c:?}");
        let zero = alpha_rewrite_bound(&dom, &Field::zeros(4), 1, 2.0, 1.0, 2.0, &AlphaOptions::default()).unwrap();
        assert!(zero.pass);
        let lin = alpha_linear_criterion(&dom, 2.0, 1.0, 2.0, 2.0, &[1.0, 2.0], &AlphaOptions::default()).unwrap();
        assert!(lin.pass);
    }
}
