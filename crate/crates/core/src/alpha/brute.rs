//! Exhaustive grid oracle for the α-function on tiny instances.
//!
//! The candidate set is the scale-closed grid
//! `H = { 2^{-e} g : e >= 0, g ∈ {0, 1/L, ..., 1}^V }`. It is closed under
//! halving, so the oracle satisfies `α(2^j τ) <= 2^j α(τ)` exactly, and it
//! is a subset of `[0, 1]^V`, so every value is a lower bound on the true α.
//! For `σ >= 1` every grid field is feasible, which truncates the scales:
//! `α_H(τ) = max_{e <= E} α_G(2^e τ) / 2^e` with `E` the least `e` such that
//! `2^e τ >= 1`.

use crate::certificate::EPS_NUM;
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::maximal::check_exponent;
use crate::poincare::check_nu_kappa;
use crate::space::{Domain, Vertex};

use super::{AlphaQuery, PointSetup};

pub const BRUTE_MAX_VERTICES: usize = 6;
pub const BRUTE_MAX_LEVELS: usize = 5;

/// Per-point table of `(M_{p,κd} g(x), value(g))` over the base grid, sorted
/// by level with running maxima of the value.
#[derive(Debug, Clone)]
struct PointTable {
    levels: Vec<f64>,
    best: Vec<f64>,
}

impl PointTable {
    /// `α_G(σ)`: best value among grid fields with level `<= σ + ε`.
    fn grid_alpha(&self, sigma: f64) -> f64 {
        let k = self.levels.partition_point(|&m| m <= sigma + EPS_NUM);
        if k == 0 {
            0.0
        } else {
            self.best[k - 1]
        }
    }

    fn scale_closed(&self, tau: f64) -> f64 {
        let mut out = self.grid_alpha(tau);
        if tau == 0.0 {
            return out;
        }
        let mut scale = 1.0;
        let mut sigma = tau;
        while sigma < 1.0 && scale < 2f64.powi(1000) {
            scale *= 2.0;
            sigma *= 2.0;
            out = out.max(self.grid_alpha(sigma) / scale);
        }
        out
    }
}

/// The oracle's precomputed tables, reusable across τ.
#[derive(Debug, Clone)]
pub struct AlphaBruteProfile {
    points: Vec<(Vertex, PointTable)>,
}

impl AlphaBruteProfile {
    pub fn new(domain: &Domain<'_>, nu: f64, kappa: f64, p: f64, levels: usize, x: Option<Vertex>, exec: Exec) -> Result<Self> {
        let space = domain.space();
        check_exponent(p)?;
        check_nu_kappa(nu, kappa)?;
        if space.len() > BRUTE_MAX_VERTICES {
            return Err(Error::TooLarge {
                what: "alpha brute force",
                size: space.len(),
                limit: BRUTE_MAX_VERTICES,
            });
        }
        if levels == 0 || levels > BRUTE_MAX_LEVELS {
            return Err(invalid(format!("levels must be in 1..={BRUTE_MAX_LEVELS}, got {levels}")));
        }
        let points: Vec<Vertex> = match x {
            Some(x) => {
                domain.dist_to_complement(x)?;
                vec![x]
            }
            None => domain.omega().collect(),
        };
        let tables = exec.try_map(&points, |&x| table(domain, x, nu, kappa, p, levels))?;
        Ok(Self {
            points: points.into_iter().zip(tables).collect(),
        })
    }

    /// Oracle value at `τ`, maximized over the profiled points.
    pub fn alpha(&self, tau: f64) -> f64 {
        self.points.iter().map(|(_, t)| t.scale_closed(tau)).fold(0.0, f64::max)
    }

    pub fn alpha_at(&self, x: Vertex, tau: f64) -> Option<f64> {
        self.points.iter().find(|(v, _)| *v == x).map(|(_, t)| t.scale_closed(tau))
    }
}

fn table(domain: &Domain<'_>, x: Vertex, nu: f64, kappa: f64, p: f64, levels: usize) -> Result<PointTable> {
    let setup = PointSetup::new(domain, x, p, nu, kappa)?;
    let space = domain.space();
    let n = space.len();
    let paths = candidate_paths(domain, x, nu * setup.d);
    let coeffs: Vec<Vec<f64>> = paths
        .iter()
        .map(|vs| {
            let mut c = vec![0.0; n];
            for w in vs.windows(2) {
                let half = 0.5 * space.edge_length(w[0], w[1]).expect("edge");
                c[w[0]] += half;
                c[w[1]] += half;
            }
            c
        })
        .collect();
    let base = levels + 1;
    let total = base.pow(n as u32);
    let grid: Vec<f64> = (0..=levels).map(|j| j as f64 / levels as f64).collect();
    let mut rows: Vec<(f64, f64)> = Vec::with_capacity(total);
    let mut g = vec![0.0; n];
    let mut gp = vec![0.0; n];
    for code in 0..total {
        let mut c = code;
        for v in 0..n {
            g[v] = grid[c % base];
            gp[v] = if p == 1.0 { g[v] } else { g[v].powf(p) };
            c /= base;
        }
        let mut worst: f64 = 0.0;
        for (members, measure) in &setup.balls {
            let s: f64 = members.iter().map(|&v| gp[v] * space.measure(v)).sum();
            worst = worst.max(s / measure);
        }
        let level = if p == 1.0 { worst } else { worst.powf(1.0 / p) };
        let value = coeffs
            .iter()
            .map(|c| c.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
            / setup.d;
        rows.push((level, value));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut best = Vec::with_capacity(rows.len());
    let mut run: f64 = 0.0;
    for &(_, v) in &rows {
        run = run.max(v);
        best.push(run);
    }
    Ok(PointTable {
        levels: rows.iter().map(|r| r.0).collect(),
        best,
    })
}

/// Simple paths from `x` that stop at their first vertex of Ω^c and fit the
/// length budget. Longer curves through Ω^c have a cheaper prefix in the
/// same family, so they never attain the infimum.
fn candidate_paths(domain: &Domain<'_>, x: Vertex, budget: f64) -> Vec<Vec<Vertex>> {
    let space = domain.space();
    let mut out = Vec::new();
    let mut stack = vec![x];
    let mut on = vec![false; space.len()];
    on[x] = true;
    fn walk(domain: &Domain<'_>, budget: f64, stack: &mut Vec<Vertex>, on: &mut [bool], len: f64, out: &mut Vec<Vec<Vertex>>) {
        let space = domain.space();
        let v = *stack.last().expect("nonempty");
        for &(w, l) in space.neighbors(v) {
            let nl = len + l;
            if on[w] || nl > budget + 1e-12 * budget.max(1.0) {
                continue;
            }
            stack.push(w);
            if !domain.contains(w) {
                out.push(stack.clone());
            } else {
                on[w] = true;
                walk(domain, budget, stack, on, nl, out);
                on[w] = false;
            }
            stack.pop();
        }
    }
    walk(domain, budget, &mut stack, &mut on, 0.0, &mut out);
    out
}

/// Grid-oracle value of `α_p(ν, κ, τ)` at `query.x` or maximized over Ω.
pub fn alpha_brute(domain: &Domain<'_>, query: &AlphaQuery, levels: usize) -> Result<f64> {
    query.validate(domain)?;
    let profile = AlphaBruteProfile::new(domain, query.nu, query.kappa, query.p, levels, query.x, Exec::Sequential)?;
    Ok(profile.alpha(query.tau))
}
