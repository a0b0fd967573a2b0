//! Restricted maximal operators `M_{p,r}` and the scale-invariant weak-type
//! estimate relating level sets of `M_{q,s} f` to `M_{q,r+3s} f`.

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, EPS_NUM};
use crate::error::{invalid, Result};
use crate::field::Field;
use crate::space::{Space, Vertex};

/// Parameters of one evaluation of `M_{p,r} f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalQuery {
    pub p: f64,
    pub r: f64,
    pub x: Vertex,
}

impl MaximalQuery {
    pub fn validate(&self, space: &Space) -> Result<()> {
        space.check_vertex(self.x)?;
        check_exponent(self.p)?;
        if !(self.r >= 0.0) || self.r.is_nan() {
            return Err(invalid(format!("radius must be >= 0, got {}", self.r)));
        }
        Ok(())
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("exponent must be >= 1, got {p}")));
    }
    Ok(())
}

/// `M_{p,r} f(x)`: the supremum of `(⨍_B |f|^p dμ)^{1/p}` over balls
/// `B = B(y, t)` with `x ∈ B` and `0 < t < r`; `|f(x)|` when `r = 0`.
pub fn restricted_maximal(space: &Space, f: &Field, query: &MaximalQuery) -> Result<f64> {
    query.validate(space)?;
    f.check_len(space)?;
    if query.r == 0.0 {
        return Ok(f.get(query.x).abs());
    }
    let powered = powered(f, query.p);
    Ok(maximal_powered(space, &powered, query.p, query.r, query.x))
}

/// Shorthand for [`restricted_maximal`].
pub fn maximal(space: &Space, f: &Field, p: f64, r: f64, x: Vertex) -> Result<f64> {
    restricted_maximal(space, f, &MaximalQuery { p, r, x })
}

/// `M_{p,r} f` at every vertex.
pub fn maximal_all(space: &Space, f: &Field, p: f64, r: f64) -> Result<Vec<f64>> {
    MaximalQuery { p, r, x: 0 }.validate(space)?;
    f.check_len(space)?;
    if r == 0.0 {
        return Ok(f.values().iter().map(|v| v.abs()).collect());
    }
    let powered = powered(f, p);
    Ok(space
        .vertices()
        .map(|x| maximal_powered(space, &powered, p, r, x))
        .collect())
}

pub(crate) fn powered(f: &Field, p: f64) -> Vec<f64> {
    f.values()
        .iter()
        .map(|v| if p == 1.0 { v.abs() } else { v.abs().powf(p) })
        .collect()
}

/// Core scan: for every center `y` with `d(y, x) < r`, grow the ball one
/// distance shell at a time and take the best admissible average of
/// `powered = |f|^p`.
pub(crate) fn maximal_powered(space: &Space, powered: &[f64], p: f64, r: f64, x: Vertex) -> f64 {
    let mut best: f64 = 0.0;
    for y in space.vertices() {
        let dyx = space.dist(y, x);
        if dyx >= r {
            continue;
        }
        let order = space.by_distance(y);
        let (mut num, mut den) = (0.0, 0.0);
        let mut i = 0;
        while i < order.len() {
            let c = space.dist(y, order[i]);
            if c >= r {
                break;
            }
            while i < order.len() && space.dist(y, order[i]) == c {
                let v = order[i];
                num += powered[v] * space.measure(v);
                den += space.measure(v);
                i += 1;
            }
            if c >= dyx {
                best = best.max(num / den);
            }
        }
    }
    if p == 1.0 {
        best
    } else {
        best.powf(1.0 / p)
    }
}

/// Inputs of the weak-type estimate
/// `M_{1,r} 1_E(x) <= D^5 (M_{q,r+3s} f(x))^q / λ^q`, `E = {M_{q,s} f > λ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeParams {
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub lambda: f64,
}

pub fn weak_type_check(space: &Space, f: &Field, params: &WeakTypeParams, x: Vertex) -> Result<Certificate> {
    weak_type_check_with(space, f, params, x, space.doubling_constant())
}

/// [`weak_type_check`] with a precomputed doubling constant.
pub fn weak_type_check_with(
    space: &Space,
    f: &Field,
    params: &WeakTypeParams,
    x: Vertex,
    doubling: f64,
) -> Result<Certificate> {
    let WeakTypeParams { q, r, s, lambda } = *params;
    check_exponent(q)?;
    for (name, v) in [("r", r), ("s", s), ("lambda", lambda)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    space.check_vertex(x)?;
    f.check_len(space)?;

    let level = maximal_all(space, f, q, s)?;
    let in_e: Vec<bool> = level.iter().map(|&m| m > lambda).collect();
    let lhs = maximal(space, &Field::indicator(&in_e), 1.0, r, x)?;
    let big = maximal(space, f, q, r + 3.0 * s, x)?;
    let rhs = doubling.powi(5) * (big / lambda).powf(q);
    let mut cert = Certificate::inequality("weak_type", lhs, rhs, EPS_NUM)
        .with("D", doubling)
        .with("q", q)
        .with("r", r)
        .with("s", s)
        .with("lambda", lambda);
    cert.set("level_set_size", in_e.iter().filter(|&&b| b).count() as f64);
    Ok(cert)
}
