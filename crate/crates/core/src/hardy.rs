//! Pointwise p-Hardy inequalities, their curve characterization, and the
//! empirical constant `C_Γ`.

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, EPS_NUM};
use crate::curves::{inf_connection_potential, is_upper_gradient, min_integral_path, CurveFamilyQuery, MinPath};
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::field::Field;
use crate::maximal::{check_exponent, maximal_powered, powered};
use crate::poincare::{check_nu_kappa, ratio};
use crate::sampling::{ConstantEstimate, EstimateOptions, DOMAIN_FAMILIES};
use crate::space::{Domain, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyParams {
    pub p: f64,
    pub c_h: f64,
    pub kappa: f64,
}

/// `|u(x)| <= C_H d(x,Ω^c) M_{p,κ d(x,Ω^c)} g(x)`.
///
/// `u` must vanish on Ω^c. Whether `g` is an upper gradient of `u` is
/// verified edge by edge and reported as a stage.
pub fn pointwise_hardy_check(domain: &Domain<'_>, u: &Field, g: &Field, params: &HardyParams, x: Vertex) -> Result<Certificate> {
    let space = domain.space();
    check_exponent(params.p)?;
    if !(params.c_h > 0.0) || !(params.kappa >= 1.0) {
        return Err(invalid("C_H must be positive and kappa >= 1"));
    }
    let d = domain.dist_to_complement(x)?;
    u.check_len(space)?;
    if let Some(v) = domain.complement().find(|&v| u.get(v) != 0.0) {
        return Err(Error::Precondition(format!("u must vanish on the complement, u(`{}`) = {}", space.id(v), u.get(v))));
    }
    g.check_nonnegative(space, "upper gradient")?;
    let m = maximal_powered(space, &powered(g, params.p), params.p, params.kappa * d, x);
    let mut cert = Certificate::inequality("pointwise_hardy", u.get(x).abs(), params.c_h * d * m, EPS_NUM)
        .with("p", params.p)
        .with("C_H", params.c_h)
        .with("kappa", params.kappa)
        .with("d", d)
        .with("M", m);
    cert.note(format!("x = `{}`", space.id(x)));
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
pub struct HardyCharParams {
    pub p: f64,
    pub c_gamma: f64,
    pub nu: f64,
    pub kappa: f64,
}

/// Both sides of the curve characterization without the constant.
pub struct HardyParts {
    pub d: f64,
    pub min_path: MinPath,
    pub m: f64,
}

impl HardyParts {
    pub fn base(&self) -> f64 {
        self.d * self.m
    }
}

pub fn hardy_parts(domain: &Domain<'_>, g: &Field, p: f64, nu: f64, kappa: f64, x: Vertex) -> Result<HardyParts> {
    hardy_parts_powered(domain, g, &powered(g, p), p, nu, kappa, x)
}

fn hardy_parts_powered(domain: &Domain<'_>, g: &Field, gp: &[f64], p: f64, nu: f64, kappa: f64, x: Vertex) -> Result<HardyParts> {
    let space = domain.space();
    let d = domain.dist_to_complement(x)?;
    let min_path = min_integral_path(space, g, &CurveFamilyQuery::to_complement(domain, x, nu))?;
    let m = maximal_powered(space, gp, p, kappa * d, x);
    Ok(HardyParts { d, min_path, m })
}

/// `inf_{γ ∈ Γ^ν_{x,Ω^c}} ∫_γ g <= C_Γ d(x,Ω^c) M_{p,κ d(x,Ω^c)} g(x)`.
pub fn hardy_curve_char(domain: &Domain<'_>, g: &Field, params: &HardyCharParams, x: Vertex) -> Result<Certificate> {
    let space = domain.space();
    check_exponent(params.p)?;
    check_nu_kappa(params.nu, params.kappa)?;
    domain.dist_to_complement(x)?;
    g.check_nonnegative(space, "g")?;
    let parts = hardy_parts(domain, g, params.p, params.nu, params.kappa, x)?;
    let mut cert = Certificate::inequality("hardy_curve", parts.min_path.value, params.c_gamma * parts.base(), EPS_NUM)
        .with("p", params.p)
        .with("C_Gamma", params.c_gamma)
        .with("nu", params.nu)
        .with("kappa", params.kappa)
        .with("d", parts.d)
        .with("M", parts.m);
    cert.note(format!("x = `{}`", space.id(x)));
    cert.witnesses.push(parts.min_path.path.witness(space, g, "minimal curve"));
    Ok(cert)
}

/// [`hardy_curve_char`] for `g` vanishing on Ω^c.
pub fn hardy_char_restricted(domain: &Domain<'_>, g: &Field, params: &HardyCharParams, x: Vertex) -> Result<Certificate> {
    let space = domain.space();
    g.check_len(space)?;
    if let Some(v) = domain.complement().find(|&v| g.get(v) != 0.0) {
        return Err(Error::Precondition(format!("g must vanish on the complement, g(`{}`) = {}", space.id(v), g.get(v))));
    }
    let mut cert = hardy_curve_char(domain, g, params, x)?;
    cert.kind = "hardy_curve_restricted".into();
    Ok(cert)
}

/// Empirical `C_Γ`: the largest `lhs / (d M g(x))` over sampled gradient
/// candidates and every `x ∈ Ω`.
pub fn estimate_ch(domain: &Domain<'_>, p: f64, nu: f64, kappa: f64, opts: &EstimateOptions) -> Result<ConstantEstimate> {
    let space = domain.space();
    check_exponent(p)?;
    check_nu_kappa(nu, kappa)?;
    if opts.trials == 0 && opts.extra.is_empty() {
        return Err(invalid("estimation needs at least one trial"));
    }
    for f in &opts.extra {
        f.check_len(space)?;
    }
    let candidates = opts.candidates(space, Some(domain), &DOMAIN_FAMILIES);
    let omega: Vec<Vertex> = domain.omega().collect();
    let parts = opts.exec.try_map(&candidates, |(label, g)| -> Result<(String, f64, Vec<String>)> {
        let gp = powered(g, p);
        let mut best = (0.0, Vec::new());
        for &x in &omega {
            let t = hardy_parts_powered(domain, g, &gp, p, nu, kappa, x)?;
            let r = ratio(t.min_path.value, t.base());
            if r > best.0 {
                best = (r, vec![space.id(x).to_string()]);
            }
        }
        Ok((label.clone(), best.0, best.1))
    })?;
    Ok(ConstantEstimate::merge(parts))
}

/// A certified `C_Γ`: the geodesic from `x` to its nearest point of Ω^c
/// lies in the admissible ball `B(x, κ d(x,Ω^c))`, which bounds its integral
/// by `K_x M_1 g(x) <= K_x M_p g(x)`. Valid for every `p >= 1` and `ν >= 1`.
pub fn cgamma_upper_bound(domain: &Domain<'_>, kappa: f64) -> Result<f64> {
    let space = domain.space();
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(invalid(format!("the certified bound needs kappa > 1, got {kappa}")));
    }
    let ones = Field::constant(space.len(), 1.0);
    let mut best: f64 = 0.0;
    for x in domain.omega() {
        let d = domain.dist_to_complement(x)?;
        let path = min_integral_path(space, &ones, &CurveFamilyQuery::to_complement(domain, x, 1.0))?.path;
        best = best.max(crate::poincare::geodesic_ball_factor(space, &path, x, kappa * d) / d);
    }
    Ok(best)
}

/// One row of the per-point Hardy report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyRow {
    pub x: String,
    pub d: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    pub path_length: f64,
}

/// [`hardy_curve_char`] at every `x ∈ Ω` for a fixed `g`.
pub fn hardy_table(domain: &Domain<'_>, g: &Field, params: &HardyCharParams, exec: Exec) -> Result<Vec<HardyRow>> {
    let space = domain.space();
    check_exponent(params.p)?;
    check_nu_kappa(params.nu, params.kappa)?;
    g.check_nonnegative(space, "g")?;
    let gp = powered(g, params.p);
    let omega: Vec<Vertex> = domain.omega().collect();
    exec.try_map(&omega, |&x| {
        let t = hardy_parts_powered(domain, g, &gp, params.p, params.nu, params.kappa, x)?;
        let rhs = params.c_gamma * t.base();
        Ok::<_, Error>(HardyRow {
            x: space.id(x).to_string(),
            d: t.d,
            lhs: t.min_path.value,
            rhs,
            ratio: ratio(t.min_path.value, t.base()),
            pass: crate::certificate::holds(t.min_path.value, rhs, EPS_NUM),
            path_length: t.min_path.path.length(),
        })
    })
}

/// The test function of the converse construction:
/// `u = inf_σ ∫_σ h` with `h = g + M_{p,κ d(x,Ω^c)} g(x) + δ`.
pub fn forward_test_function(domain: &Domain<'_>, g: &Field, x: Vertex, kappa: f64, p: f64, delta: f64) -> Result<Field> {
    let space = domain.space();
    check_exponent(p)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    if !(kappa >= 1.0) {
        return Err(invalid(format!("kappa must be >= 1, got {kappa}")));
    }
    let d = domain.dist_to_complement(x)?;
    g.check_nonnegative(space, "g")?;
    let shift = maximal_powered(space, &powered(g, p), p, kappa * d, x) + delta;
    let h = g.map(|v| v + shift);
    inf_connection_potential(domain, &h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;

    fn path3() -> Space {
        Space::new(
            vec![("a".into(), 1.0), ("b".into(), 1.0), ("c".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0), ("b".into(), "c".into(), 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn pointwise_example() {
        let s = path3();
        let dom = Domain::new(&s, &[0, 1]).unwrap();
        let u = Field::new(vec![2.0, 1.0, 0.0]);
        let g = Field::constant(3, 1.0);
        let at = |c_h| pointwise_hardy_check(&dom, &u, &g, &HardyParams { p: 1.0, c_h, kappa: 2.0 }, 0).unwrap();
        let ok = at(1.0);
        assert_eq!((ok.lhs, ok.rhs), (2.0, 2.0));
        assert!(ok.pass);
        assert!(!at(0.99).pass);
        let zero = pointwise_hardy_check(&dom, &Field::zeros(3), &g, &HardyParams { p: 2.0, c_h: 0.1, kappa: 1.0 }, 1).unwrap();
        assert!(zero.pass);
        let flat = pointwise_hardy_check(&dom, &u, &Field::zeros(3), &HardyParams { p: 1.0, c_h: 1e6, kappa: 1.0 }, 0).unwrap();
        assert!(!flat.pass);
        assert!(pointwise_hardy_check(&dom, &u, &g, &HardyParams { p: 1.0, c_h: 1.0, kappa: 1.0 }, 2).is_err());
        assert!(pointwise_hardy_check(&dom, &Field::new(vec![2.0, 1.0, 1.0]), &g, &HardyParams { p: 1.0, c_h: 1.0, kappa: 1.0 }, 0).is_err());
    }

    #[test]
    fn curve_char_constant_fields() {
        let s = path3();
        let dom = Domain::new(&s, &[0, 1]).unwrap();
        let params = HardyCharParams { p: 2.0, c_gamma: 1.0, nu: 2.0, kappa: 2.0 };
        let zero = hardy_curve_char(&dom, &Field::zeros(3), &params, 0).unwrap();
        assert_eq!((zero.lhs, zero.rhs), (0.0, 0.0));
        let one = hardy_curve_char(&dom, &Field::constant(3, 1.0), &params, 0).unwrap();
        assert_eq!((one.lhs, one.rhs), (2.0, 2.0));
        assert!(!hardy_curve_char(&dom, &Field::constant(3, 1.0), &HardyCharParams { c_gamma: 0.9, ..params }, 0).unwrap().pass);
    }

    #[test]
    fn restricted_variant() {
        let s = path3();
        let dom = Domain::new(&s, &[0, 1]).unwrap();
        let params = HardyCharParams { p: 1.0, c_gamma: 1.0, nu: 2.0, kappa: 2.0 };
        // 1_Ω along a-b-c: 1 + 0.5.
        let c = hardy_char_restricted(&dom, &Field::new(vec![1.0, 1.0, 0.0]), &params, 0).unwrap();
        assert_eq!(c.lhs, 1.5);
        assert!(hardy_char_restricted(&dom, &Field::constant(3, 1.0), &params, 0).is_err());
    }

    #[test]
    fn estimate_on_path() {
        let s = path3();
        let dom = Domain::new(&s, &[0, 1]).unwrap();
        let one = estimate_ch(&dom, 1.0, 2.0, 2.0, &EstimateOptions::new(1, 0)).unwrap();
        assert_eq!(one.value, 1.0);
        let zero = estimate_ch(&dom, 1.0, 2.0, 2.0, &EstimateOptions::new(0, 0).with_extra(vec![Field::zeros(3)])).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn forward_function() {
        let s = path3();
        let dom = Domain::new(&s, &[0, 1]).unwrap();
        let u = forward_test_function(&dom, &Field::zeros(3), 0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(u.values(), &[2.0, 1.0, 0.0]);
        assert!(forward_test_function(&dom, &Field::zeros(3), 0, 1.0, 2.0, 0.0).is_err());
    }
}
