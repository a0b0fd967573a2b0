use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, EPS_NUM};
use crate::curves::{min_integral_path, path_integral, CurveFamilyQuery, PathRec};
use crate::error::Result;
use crate::field::Field;
use crate::maximal::maximal;
use crate::poincare::{two_point_char, CurveCharParams};
use crate::space::{Domain, Vertex};

use super::gaps::{gap_decompose, level_usage, GapDecomposition};
use super::levels::{essential_from_levels, level_sets_unchecked, require_feasible, LevelSets};
use super::params::ImprovementParams;

/// Supplies `α_{q}(N, K, M^{i0} τ)` (or a lower estimate of it) for a level
/// index `i0`. Called only when the base curve has a final gap.
pub type AlphaSurrogate<'a> = dyn FnMut(u64) -> Result<f64> + 'a;

/// Everything a pipeline run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovedCurve {
    pub certificate: Certificate,
    pub i0: Option<u64>,
    pub gamma0: PathRec,
    pub decomposition: Option<GapDecomposition>,
    pub curve: Option<PathRec>,
    /// The α value used for the final gap, if there was one.
    pub alpha: Option<f64>,
}

fn constants(c: Certificate, params: &ImprovementParams, tau: f64, d: f64) -> Certificate {
    c.with("p", params.p)
        .with("p_prime", params.p_prime)
        .with("q", params.q)
        .with("kappa", params.kappa)
        .with("nu", params.nu)
        .with("K", params.big_k)
        .with("N", params.big_n)
        .with("M", params.m)
        .with("delta", params.delta)
        .with("k", params.k as f64)
        .with("S", params.s)
        .with("log10_S", params.log10_s)
        .with("C_Gamma", params.c_gamma)
        .with("C_A", params.c_a)
        .with("D", params.doubling)
        .with("tau", tau)
        .with("d", d)
}

/// Smallest `i` whose set the base curve meets for at most
/// `δ M^{-iq/p} d`, measured both by the trapezoid integral of `1_{E_i}` and
/// by the length of the edges touching `E_i`.
fn select_i0(domain: &Domain<'_>, levels: &LevelSets, gamma0: &PathRec, params: &ImprovementParams, d: f64) -> Option<u64> {
    let deepest = gamma0.vertices().iter().map(|&v| levels.counts[v]).max().unwrap_or(0);
    (1..=params.k.min(deepest + 1)).find(|&i| {
        let bound = params.level_budget(i, d) + EPS_NUM;
        let (integral, touched) = level_usage(domain, gamma0, &levels.mask(i));
        integral <= bound && touched <= bound
    })
}

fn append(out: &mut Vec<Vertex>, piece: &[Vertex]) {
    debug_assert_eq!(out.last(), piece.first());
    out.extend_from_slice(&piece[1..]);
}

/// Builds, for a feasible `g` (`M_{q,Kd} g(x) <= τ`), a curve from `x` to
/// Ω^c of length at most `N d` with
/// `∫_γ g <= S τ d + δ M^{-i0 q/p} α d`, recording every intermediate bound.
///
/// `slack` is the additive tolerance of the final inequality.
pub fn construct_improved_curve(
    domain: &Domain<'_>,
    g: &Field,
    x: Vertex,
    params: &ImprovementParams,
    tau: f64,
    alpha_surrogate: &mut AlphaSurrogate<'_>,
    slack: f64,
) -> Result<ImprovedCurve> {
    let space = domain.space();
    let level = require_feasible(domain, g, x, params, tau)?;
    let d = domain.dist_to_complement(x)?;
    let mut stages = Vec::new();
    stages.push(Certificate::inequality("feasibility", level, tau, EPS_NUM));

    let levels = level_sets_unchecked(domain, g, x, params, tau);
    stages.push(essential_from_levels(domain, &levels, x, params, level));
    let h = levels.h(params);
    let gamma0 = min_integral_path(space, &h, &CurveFamilyQuery::to_complement(domain, x, params.nu))?;
    let mh = maximal(space, &h, params.p, params.kappa * d, x)?;
    stages.push(Certificate::inequality("gamma0_length", gamma0.path.length(), params.nu * d, EPS_NUM));
    stages.push(Certificate::inequality("hardy_char_h", gamma0.value, params.c_gamma * d * mh, EPS_NUM).with("M_h", mh));
    stages.push(Certificate::inequality("gamma0_h_integral", gamma0.value, params.delta * d, EPS_NUM));
    let gamma0 = gamma0.path;

    let finish = |mut stages: Vec<Certificate>, top: Certificate| {
        let mut cert = constants(top, params, tau, d);
        for s in stages.drain(..) {
            cert.push_stage(s);
        }
        cert
    };

    let Some(i0) = select_i0(domain, &levels, &gamma0, params, d) else {
        stages.push(
            Certificate::inequality("i0_selection", 1.0, 0.0, 0.0)
                .with("depth", levels.depth() as f64),
        );
        let mut cert = finish(stages, Certificate::inequality("improved_curve", f64::NAN, f64::NAN, slack));
        cert.note("no level index meets its budget along the base curve; run is inconsistent");
        cert.witnesses.push(gamma0.witness(space, &h, "gamma0"));
        return Ok(ImprovedCurve {
            certificate: cert,
            i0: None,
            gamma0,
            decomposition: None,
            curve: None,
            alpha: None,
        });
    };
    let e = levels.mask(i0);
    let (usage, touched) = level_usage(domain, &gamma0, &e);
    stages.push(
        Certificate::inequality("i0_selection", usage.max(touched), params.level_budget(i0, d), EPS_NUM)
            .with("i0", i0 as f64)
            .with("integral", usage)
            .with("touched", touched),
    );
    let dec = gap_decompose(domain, &gamma0, &e, i0, params)?;
    stages.push(dec.certificate());
    stages.push(Certificate::inequality("start_outside_level", if e[x] { 1.0 } else { 0.0 }, 0.0, 0.0));

    let vs = gamma0.vertices();
    let level_i0 = params.m.powf(i0 as f64) * tau;
    let on_omega = |v: Vertex| if domain.contains(v) { level_i0 } else { g.get(v) };
    let mut curve = vec![x];
    let mut kept_rhs = 0.0;
    let mut kept_len = 0.0;
    let mut gap_rhs = 0.0;
    let mut patch_len = 0.0;
    let mut segments = dec.kept_segments.iter();
    let mut cut_points: Vec<(usize, usize)> = dec.gaps.iter().map(|gp| (gp.a, gp.b)).chain(dec.excised.iter().copied()).collect();
    cut_points.sort_unstable();
    let mut take_kept = |curve: &mut Vec<Vertex>, kept_rhs: &mut f64, kept_len: &mut f64| {
        if let Some(&(s, t)) = segments.next() {
            if t > s {
                append(curve, &vs[s..=t]);
                for w in vs[s..=t].windows(2) {
                    let l = space.edge_length(w[0], w[1]).expect("path edge");
                    *kept_rhs += 0.5 * l * (on_omega(w[0]) + on_omega(w[1]));
                    *kept_len += l;
                }
            }
        }
    };
    for &(a, b) in &cut_points {
        take_kept(&mut curve, &mut kept_rhs, &mut kept_len);
        let (va, vb) = (vs[a], vs[b]);
        if va == vb {
            continue;
        }
        let di = space.dist(va, vb);
        let patch = min_integral_path(space, g, &CurveFamilyQuery::to_vertex(va, vb, params.nu))?;
        let bound = 3.0 * params.c_a * level_i0 * di;
        let mut c = Certificate::inequality("gap_patch", patch.value, bound, EPS_NUM)
            .with("a", a as f64)
            .with("b", b as f64)
            .with("d_i", di);
        c.push_stage(Certificate::inequality("patch_length", patch.path.length(), params.nu * di, EPS_NUM));
        let tp = CurveCharParams {
            p: params.p_prime,
            c_a: params.c_a,
            nu: params.nu,
            kappa: params.kappa,
        };
        c.push_stage(two_point_char(space, g, va, vb, &tp)?);
        c.witnesses.push(patch.path.witness(space, g, "patch"));
        stages.push(c);
        append(&mut curve, patch.path.vertices());
        gap_rhs += bound;
        patch_len += patch.path.length();
    }
    take_kept(&mut curve, &mut kept_rhs, &mut kept_len);

    let mut alpha = None;
    let mut final_rhs = 0.0;
    if let Some(fg) = dec.final_gap {
        let a0 = vs[fg.a];
        let d0 = domain.dist_to_complement(a0)?;
        let f0 = maximal(space, g, params.q, params.big_k * d0, a0)?;
        stages.push(Certificate::inequality("final_feasibility", f0, level_i0, EPS_NUM).with("d0", d0));
        let patch = min_integral_path(space, g, &CurveFamilyQuery::to_complement(domain, a0, params.big_n))?;
        // g itself is feasible at a0, so its own ratio is a lower bound for α.
        let seed = patch.value / d0;
        let surrogate = alpha_surrogate(i0)?;
        let a = surrogate.max(seed);
        alpha = Some(a);
        final_rhs = d0 * a + tau * d;
        let mut c = Certificate::inequality("final_patch", patch.value, final_rhs, EPS_NUM)
            .with("d0", d0)
            .with("alpha", a)
            .with("alpha_surrogate", surrogate)
            .with("alpha_seed", seed);
        c.push_stage(Certificate::inequality("final_length", patch.path.length(), params.big_n * d0, EPS_NUM));
        c.witnesses.push(patch.path.witness(space, g, "final patch"));
        stages.push(c);
        append(&mut curve, patch.path.vertices());
        patch_len += patch.path.length();
    }

    let curve = PathRec::new(space, curve)?;
    let integral = path_integral(space, g, &curve);
    let kept_integral: f64 = integral_of_kept(domain, g, &dec);
    stages.push(
        Certificate::inequality("kept_part", kept_integral, kept_rhs, EPS_NUM)
            .with("length", kept_len)
            .with("level_i0", level_i0),
    );
    stages.push(Certificate::inequality("assembled", integral, kept_rhs + gap_rhs + final_rhs, EPS_NUM));
    stages.push(
        Certificate::inequality("curve_length", curve.length(), params.big_n * d, EPS_NUM)
            .with("kept", kept_len)
            .with("patches", patch_len),
    );
    let absorption = alpha.map_or(0.0, |a| params.level_budget(i0, d) * a);
    let rhs = params.s * tau * d + absorption;
    let mut cert = finish(stages, Certificate::inequality("improved_curve", integral, rhs, slack))
        .with("i0", i0 as f64)
        .with("absorption_term", absorption);
    if let Some(a) = alpha {
        cert.set("alpha", a);
    }
    if !dec.excised.is_empty() {
        cert.note(format!("{} loop(s) of the base curve cut out", dec.excised.len()));
    }
    cert.witnesses.push(gamma0.witness(space, &h, "gamma0"));
    cert.witnesses.push(curve.witness(space, g, "improved curve"));
    Ok(ImprovedCurve {
        certificate: cert,
        i0: Some(i0),
        gamma0,
        decomposition: Some(dec),
        curve: Some(curve),
        alpha,
    })
}

fn integral_of_kept(domain: &Domain<'_>, g: &Field, dec: &GapDecomposition) -> f64 {
    let space = domain.space();
    dec.kept_segments
        .iter()
        .filter(|(s, t)| t > s)
        .map(|&(s, t)| path_integral(space, g, &dec.base_path.segment(space, s, t).expect("subpath")))
        .sum()
}

/// `g · min(1, τ / M_{q,Kd} g(x))`, the largest multiple (at most 1) of `g`
/// that is feasible at `x`.
pub fn scale_to_feasible(domain: &Domain<'_>, g: &Field, x: Vertex, params: &ImprovementParams, tau: f64) -> Result<Field> {
    let level = super::levels::feasibility_level(domain, g, x, params)?;
    Ok(if level > tau { g.scaled(tau / level) } else { g.clone() })
}
