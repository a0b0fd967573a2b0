//! p-Poincaré inequalities: the ball-average form, the two-point curve
//! characterization, and an empirical estimator for its constant `C_A`.

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, EPS_NUM};
use crate::curves::{is_upper_gradient, min_integral_path, CurveFamilyQuery, MinPath};
use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::maximal::{check_exponent, maximal_powered, powered};
use crate::sampling::{ConstantEstimate, EstimateOptions, SPACE_FAMILIES};
use crate::space::{Ball, Space, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareParams {
    pub p: f64,
    pub c_pi: f64,
    pub lambda: f64,
}

/// `⨍_B |u - u_B| dμ <= C_PI · r · (⨍_{λB} g^p dμ)^{1/p}` on one ball.
///
/// Whether `g` is an upper gradient of `u` is verified edge by edge (which
/// covers every curve under the trapezoid rule); a failure is reported in a
/// separate stage rather than as an error.
pub fn poincare_ball_check(space: &Space, u: &Field, g: &Field, params: &PoincareParams, ball: &Ball) -> Result<Certificate> {
    check_exponent(params.p)?;
    if !(params.c_pi > 0.0) || !(params.lambda >= 1.0) {
        return Err(invalid("C_PI must be positive and lambda >= 1"));
    }
    u.check_len(space)?;
    g.check_nonnegative(space, "upper gradient")?;
    let ball = space.ball(ball.center, ball.radius)?;
    let m = ball.measure(space);
    let u_b = ball.members.iter().map(|&v| u.get(v) * space.measure(v)).sum::<f64>() / m;
    let lhs = ball.members.iter().map(|&v| (u.get(v) - u_b).abs() * space.measure(v)).sum::<f64>() / m;

    let big = space.ball(ball.center, params.lambda * ball.radius)?;
    let gp = powered(g, params.p);
    let avg = big.members.iter().map(|&v| gp[v] * space.measure(v)).sum::<f64>() / big.measure(space);
    let rhs = params.c_pi * ball.radius * avg.powf(1.0 / params.p);

    let mut cert = Certificate::inequality("poincare_ball", lhs, rhs, EPS_NUM)
        .with("p", params.p)
        .with("C_PI", params.c_pi)
        .with("lambda", params.lambda)
        .with("radius", ball.radius)
        .with("u_B", u_b);
    cert.note(format!("ball center `{}`", space.id(ball.center)));
    let ug = is_upper_gradient(space, u, g, EPS_NUM);
    cert.note(if ug {
        "upper-gradient: verified"
    } else {
        "upper-gradient: violated"
    });
    cert.push_stage(Certificate::inequality("upper_gradient", if ug { 0.0 } else { 1.0 }, 0.0, 0.0));
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveCharParams {
    pub p: f64,
    pub c_a: f64,
    pub nu: f64,
    pub kappa: f64,
}

pub(crate) fn check_nu_kappa(nu: f64, kappa: f64) -> Result<()> {
    if !(nu > 1.0 && nu.is_finite()) {
        return Err(invalid(format!("nu must be > 1, got {nu}")));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(invalid(format!("kappa must be >= 1, got {kappa}")));
    }
    Ok(())
}

/// Both sides of the two-point inequality without the constant:
/// the minimal integral over `Γ^ν_{x,y}` and
/// `d(x,y)·(M_{p,κd} g(x) + M_{p,κd} g(y))`.
pub struct TwoPointParts {
    pub min_path: MinPath,
    pub base: f64,
    pub mx: f64,
    pub my: f64,
}

pub fn two_point_parts(space: &Space, g: &Field, x: Vertex, y: Vertex, p: f64, nu: f64, kappa: f64) -> Result<TwoPointParts> {
    let gp = powered(g, p);
    two_point_parts_powered(space, g, &gp, x, y, p, nu, kappa)
}

#[allow(clippy::too_many_arguments)]
fn two_point_parts_powered(
    space: &Space,
    g: &Field,
    gp: &[f64],
    x: Vertex,
    y: Vertex,
    p: f64,
    nu: f64,
    kappa: f64,
) -> Result<TwoPointParts> {
    let d = space.dist(x, y);
    let min_path = min_integral_path(space, g, &CurveFamilyQuery::to_vertex(x, y, nu))?;
    let r = kappa * d;
    let mx = maximal_powered(space, gp, p, r, x);
    let my = maximal_powered(space, gp, p, r, y);
    Ok(TwoPointParts {
        min_path,
        base: d * (mx + my),
        mx,
        my,
    })
}

/// `inf_{γ ∈ Γ^ν_{x,y}} ∫_γ g <= C_A d(x,y) (M_{p,κd} g(x) + M_{p,κd} g(y))`.
pub fn two_point_char(space: &Space, g: &Field, x: Vertex, y: Vertex, params: &CurveCharParams) -> Result<Certificate> {
    check_exponent(params.p)?;
    check_nu_kappa(params.nu, params.kappa)?;
    space.check_vertex(x)?;
    space.check_vertex(y)?;
    if x == y {
        return Err(invalid("two-point characterization needs distinct points"));
    }
    g.check_gradient(space)?;
    let parts = two_point_parts(space, g, x, y, params.p, params.nu, params.kappa)?;
    let mut cert = Certificate::inequality("two_point", parts.min_path.value, params.c_a * parts.base, EPS_NUM)
        .with("p", params.p)
        .with("C_A", params.c_a)
        .with("nu", params.nu)
        .with("kappa", params.kappa)
        .with("d", space.dist(x, y))
        .with("M_x", parts.mx)
        .with("M_y", parts.my);
    cert.witnesses.push(parts.min_path.path.witness(space, g, "minimal curve"));
    Ok(cert)
}

/// `lhs / rhs` with `0/0 = 0` and `x/0 = ∞` for `x > 0`.
pub(crate) fn ratio(lhs: f64, base: f64) -> f64 {
    if lhs <= 0.0 {
        0.0
    } else if base <= 0.0 {
        f64::INFINITY
    } else {
        lhs / base
    }
}

/// Empirical `C_A`: the largest ratio `lhs / base` over the sampled
/// gradient candidates and all pairs `x < y`.
pub fn estimate_ca(space: &Space, p: f64, nu: f64, kappa: f64, opts: &EstimateOptions) -> Result<ConstantEstimate> {
    check_exponent(p)?;
    check_nu_kappa(nu, kappa)?;
    if opts.trials == 0 && opts.extra.is_empty() {
        return Err(invalid("estimation needs at least one trial"));
    }
    for f in &opts.extra {
        f.check_len(space)?;
    }
    let candidates = opts.candidates(space, None, &SPACE_FAMILIES);
    let parts = opts.exec.try_map(&candidates, |(label, g)| -> Result<(String, f64, Vec<String>)> {
        let gp = powered(g, p);
        let mut best = (0.0, Vec::new());
        for x in space.vertices() {
            for y in x + 1..space.len() {
                let t = two_point_parts_powered(space, g, &gp, x, y, p, nu, kappa)?;
                let r = ratio(t.min_path.value, t.base);
                if r > best.0 {
                    best = (r, vec![space.id(x).to_string(), space.id(y).to_string()]);
                }
            }
        }
        Ok((label.clone(), best.0, best.1))
    })?;
    Ok(ConstantEstimate::merge(parts))
}

/// `max_v c_v / μ_v · μ(B(center, radius))` over the vertices of a simple
/// path with trapezoid coefficients `c_v`. If the open ball holds the whole
/// path, then `∫_path g <= K · M_{1,radius} g(center)` for every `g >= 0`.
pub(crate) fn geodesic_ball_factor(space: &Space, path: &crate::curves::PathRec, center: Vertex, radius: f64) -> f64 {
    let coeff = crate::curves::integral_coefficients(space, path);
    let peak = path
        .vertices()
        .iter()
        .map(|&v| coeff[v] / space.measure(v))
        .fold(0.0, f64::max);
    peak * space.ball_measure(center, radius)
}

/// A certified `C_A`: for each pair the geodesic lies in the admissible
/// ball `B(x, κ d(x,y))`, so its integral is at most `K_x M_{1} g(x)`, and
/// `M_1 <= M_p`. The result is valid for every `p >= 1` and `ν >= 1`.
pub fn ca_upper_bound(space: &Space, kappa: f64) -> Result<f64> {
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(invalid(format!("the certified bound needs kappa > 1, got {kappa}")));
    }
    let ones = Field::constant(space.len(), 1.0);
    let mut best: f64 = 0.0;
    for x in space.vertices() {
        for y in x + 1..space.len() {
            let d = space.dist(x, y);
            let path = min_integral_path(space, &ones, &CurveFamilyQuery::to_vertex(x, y, 1.0))?.path;
            let kx = geodesic_ball_factor(space, &path, x, kappa * d);
            let ky = geodesic_ball_factor(space, &path, y, kappa * d);
            best = best.max(kx.min(ky) / d);
        }
    }
    Ok(best)
}

/// One row of the per-pair two-point report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub x: String,
    pub y: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub path_length: f64,
}

/// Evaluates the two-point inequality for a fixed `g` at every pair `x < y`.
pub fn two_point_table(space: &Space, g: &Field, params: &CurveCharParams, exec: crate::exec::Exec) -> Result<Vec<PairRow>> {
    check_exponent(params.p)?;
    check_nu_kappa(params.nu, params.kappa)?;
    g.check_gradient(space)?;
    let gp = powered(g, params.p);
    let pairs: Vec<(Vertex, Vertex)> = space
        .vertices()
        .flat_map(|x| (x + 1..space.len()).map(move |y| (x, y)))
        .collect();
    exec.try_map(&pairs, |&(x, y)| {
        let t = two_point_parts_powered(space, g, &gp, x, y, params.p, params.nu, params.kappa)?;
        Ok::<_, Error>(PairRow {
            x: space.id(x).to_string(),
            y: space.id(y).to_string(),
            lhs: t.min_path.value,
            rhs: params.c_a * t.base,
            ratio: ratio(t.min_path.value, t.base),
            path_length: t.min_path.path.length(),
        })
    })
}
