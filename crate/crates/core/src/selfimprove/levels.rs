use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, EPS_NUM};
use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::maximal::{maximal, maximal_powered, powered};
use crate::space::{Domain, Vertex};

use super::params::ImprovementParams;

/// The nested sets `E_i = {z ∈ Ω : M_{q,κd} g(z) > M^i τ}` for
/// `i = 1..=k`, with `d = d(x,Ω^c)`.
///
/// `k` can be astronomically large while only the first few sets are
/// nonempty (`g <= 1` bounds every average by 1), so the sets are stored as
/// the per-vertex count `c(z) = #{i <= k : z ∈ E_i}`: `z ∈ E_i ⇔ i <= c(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSets {
    pub k: u64,
    pub tau: f64,
    pub radius: f64,
    pub counts: Vec<u64>,
    /// `M_{q,κd} g(z)` on Ω, 0 on Ω^c.
    pub maximal: Vec<f64>,
}

impl LevelSets {
    pub fn contains(&self, i: u64, z: Vertex) -> bool {
        i >= 1 && i <= self.counts[z]
    }

    pub fn mask(&self, i: u64) -> Vec<bool> {
        (0..self.counts.len()).map(|z| self.contains(i, z)).collect()
    }

    /// Largest `i` with `E_i` nonempty (0 if all are empty).
    pub fn depth(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// `E_1, ..., E_depth`; all later sets are empty.
    pub fn nonempty(&self) -> Vec<Vec<bool>> {
        (1..=self.depth()).map(|i| self.mask(i)).collect()
    }

    /// `h = (1/k) Σ_{i=1}^k 1_{E_i} M^{iq/p}`.
    pub fn h(&self, params: &ImprovementParams) -> Field {
        let kf = self.k as f64;
        Field::from_fn(self.counts.len(), |z| {
            (1..=self.counts[z]).map(|i| params.level_weight(i)).sum::<f64>() / kf
        })
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// `M_{q,Kd} g(x)`, the feasibility level of `g` at `x`.
pub fn feasibility_level(domain: &Domain<'_>, g: &Field, x: Vertex, params: &ImprovementParams) -> Result<f64> {
    let d = domain.dist_to_complement(x)?;
    maximal(domain.space(), g, params.q, params.big_k * d, x)
}

/// Errors unless `g ∈ [0,1]` and `M_{q,Kd} g(x) <= τ`.
pub(crate) fn require_feasible(domain: &Domain<'_>, g: &Field, x: Vertex, params: &ImprovementParams, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    g.check_gradient(domain.space())?;
    let level = feasibility_level(domain, g, x, params)?;
    if level > tau + EPS_NUM {
        return Err(Error::Precondition(format!(
            "g is not feasible at `{}`: M_(q,Kd) g = {level} > tau = {tau}",
            domain.space().id(x)
        )));
    }
    Ok(level)
}

pub fn level_sets(domain: &Domain<'_>, g: &Field, x: Vertex, params: &ImprovementParams, tau: f64) -> Result<LevelSets> {
    require_feasible(domain, g, x, params, tau)?;
    Ok(level_sets_unchecked(domain, g, x, params, tau))
}

pub(crate) fn level_sets_unchecked(domain: &Domain<'_>, g: &Field, x: Vertex, params: &ImprovementParams, tau: f64) -> LevelSets {
    let space = domain.space();
    let radius = params.kappa * domain.complement_distance(x);
    let gq = powered(g, params.q);
    let mut counts = vec![0; space.len()];
    let mut values = vec![0.0; space.len()];
    for z in domain.omega() {
        let m = maximal_powered(space, &gq, params.q, radius, z);
        values[z] = m;
        let mut c = 0;
        let mut threshold = params.m * tau;
        while c < params.k && m > threshold {
            c += 1;
            threshold *= params.m;
        }
        counts[z] = c;
    }
    LevelSets {
        k: params.k,
        tau,
        radius,
        counts,
        maximal: values,
    }
}

/// `h` from explicit sets `E_1..E_k`, which must be nested and exactly `k`
/// long.
pub fn build_h(sets: &[Vec<bool>], params: &ImprovementParams) -> Result<Field> {
    if sets.len() as u64 != params.k {
        return Err(invalid(format!("expected {} level sets, got {}", params.k, sets.len())));
    }
    let n = sets.first().map_or(0, Vec::len);
    if sets.iter().any(|s| s.len() != n) {
        return Err(invalid("level sets have different lengths"));
    }
    for (i, w) in sets.windows(2).enumerate() {
        if (0..n).any(|z| w[1][z] && !w[0][z]) {
            return Err(invalid(format!("E_{} is not contained in E_{}", i + 2, i + 1)));
        }
    }
    let kf = params.k as f64;
    Ok(Field::from_fn(n, |z| {
        sets.iter()
            .enumerate()
            .filter(|(_, s)| s[z])
            .map(|(i, _)| params.level_weight(i as u64 + 1))
            .sum::<f64>()
            / kf
    }))
}

/// `(M_{p,κd} h(x))^p <= 2^p D^5 / k^{p-1}`, with the intermediate steps
/// as stages, followed by the strict `C_Γ M_{p,κd} h(x) < δ`.
pub fn essential_estimate_check(domain: &Domain<'_>, g: &Field, x: Vertex, params: &ImprovementParams, tau: f64) -> Result<Certificate> {
    let level = require_feasible(domain, g, x, params, tau)?;
    let levels = level_sets_unchecked(domain, g, x, params, tau);
    Ok(essential_from_levels(domain, &levels, x, params, level))
}

pub(crate) fn essential_from_levels(domain: &Domain<'_>, levels: &LevelSets, x: Vertex, params: &ImprovementParams, level: f64) -> Certificate {
    let space = domain.space();
    let (p, q, kf) = (params.p, params.q, params.k as f64);
    let d = domain.complement_distance(x);
    let r = params.kappa * d;
    let h = levels.h(params);
    let mh = maximal(space, &h, p, r, x).expect("validated inputs");
    let lhs = mh.powf(p);
    let d5 = params.doubling.powi(5);
    let rhs = 2f64.powf(p) * d5 / kf.powf(p - 1.0);
    let mut cert = Certificate::inequality("essential", lhs, rhs, EPS_NUM)
        .with("M_h", mh)
        .with("level", level)
        .with("tau", levels.tau)
        .with("k", kf)
        .with("D", params.doubling)
        .with("p", p)
        .with("q", q);

    let tau = levels.tau;
    let mut sum_weak = 0.0;
    let mut weak = Vec::new();
    for (j, mask) in levels.nonempty().iter().enumerate() {
        let j = j as u64 + 1;
        let m1 = maximal(space, &Field::indicator(mask), 1.0, r, x).expect("validated inputs");
        let lambda = params.m.powf(j as f64) * tau;
        sum_weak += m1 * params.m.powf(j as f64 * q);
        let bound = d5 * level.powf(q) / lambda.powf(q);
        weak.push(
            Certificate::inequality("weak_type", m1, bound, EPS_NUM)
                .with("j", j as f64)
                .with("lambda", lambda),
        );
    }
    let prefactor = 2f64.powf(p) / kf.powf(p);
    let chain = prefactor * sum_weak;
    cert.push_stage(Certificate::inequality("sublinearity", lhs, chain, EPS_NUM));
    for w in weak {
        cert.push_stage(w);
    }
    // Σ_{j=1}^k D^5 (M_{q,Kd} g(x))^q / (M^j τ)^q · M^{jq} = k D^5 (level/τ)^q.
    let weak_total = prefactor * kf * d5 * (level / tau).powf(q);
    cert.push_stage(Certificate::inequality("weak_type_sum", chain, weak_total, EPS_NUM));
    cert.push_stage(Certificate::inequality("feasibility", weak_total, rhs, EPS_NUM));
    cert.push_stage(
        Certificate::strict("h_maximal_small", params.c_gamma * mh, params.delta)
            .with("C_Gamma", params.c_gamma),
    );
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{grid_minus, Pattern, Weights};
    use crate::selfimprove::params::ParamInputs;

    fn params(k: Option<u64>) -> ImprovementParams {
        let i = ParamInputs {
            p: 2.0,
            p_prime: 1.0,
            q: Some(1.95),
            kappa: 2.0,
            nu: 2.0,
            c_gamma: 0.5,
            c_a: 1.0,
            doubling: 3.0,
        };
        match k {
            Some(k) => ImprovementParams::with_k(&i, k).unwrap(),
            None => ImprovementParams::with_k(&i, 40).unwrap(),
        }
    }

    #[test]
    fn trivial_level_sets() {
        let g = grid_minus(5, 5, Pattern::Center, &Weights::default()).unwrap();
        let dom = Domain::new(&g.space, &g.omega).unwrap();
        let pr = params(None);
        let zero = Field::zeros(25);
        let ls = level_sets(&dom, &zero, 0, &pr, 0.1).unwrap();
        assert_eq!(ls.depth(), 0);
        assert_eq!(ls.h(&pr).sup_abs(), 0.0);
        // τ >= 1/M: every average is at most 1 <= Mτ.
        let ones = Field::constant(25, 1.0);
        let ls = level_sets(&dom, &ones, 0, &pr, 1.0).unwrap();
        assert_eq!(ls.depth(), 0);
        assert!(level_sets(&dom, &ones, 0, &pr, 0.5).is_err());
    }

    #[test]
    fn cluster_levels_shrink() {
        // A bright corner cluster far from x = r4c4 with low average near x.
        let g = grid_minus(5, 5, Pattern::Center, &Weights::default()).unwrap();
        let mut file = g.space.to_file();
        file.vertices[0].measure = 1e-6;
        file.vertices[1].measure = 1e-3;
        file.vertices[5].measure = 1e-3;
        let space = crate::space::Space::from_file(file).unwrap();
        let dom = Domain::new(&space, &g.omega).unwrap();
        let pr = params(None);
        let f = Field::from_fn(25, |v| match v {
            0 => 1.0,
            1 | 5 => 0.05,
            _ => 0.0,
        });
        let x = 24;
        let level = feasibility_level(&dom, &f, x, &pr).unwrap();
        let ls = level_sets(&dom, &f, x, &pr, level).unwrap();
        let sets = ls.nonempty();
        assert!(sets.len() >= 2);
        for w in sets.windows(2) {
            assert!((0..25).all(|z| !w[1][z] || w[0][z]));
        }
        let size = |s: &Vec<bool>| s.iter().filter(|&&b| b).count();
        assert!(size(&sets[sets.len() - 1]) < size(&sets[0]));
        assert!(ls.contains(1, 0) && !ls.contains(1, x));
    }

    #[test]
    fn h_formula() {
        let pr = params(Some(2));
        let h = build_h(&[vec![true, true, false], vec![false, true, false]], &pr).unwrap();
        let r = pr.level_weight(1);
        assert_eq!(h.values(), &[r / 2.0, (r + pr.level_weight(2)) / 2.0, 0.0]);
        assert_eq!(h.get(0), 4f64.powf(1.95 / 2.0) / 2.0);
        assert!(build_h(&[vec![true]], &pr).is_err());
        assert!(build_h(&[vec![false], vec![true]], &pr).is_err());
    }

    #[test]
    fn essential_holds_and_small_k_flags() {
        let g = grid_minus(5, 5, Pattern::Center, &Weights::default()).unwrap();
        let dom = Domain::new(&g.space, &g.omega).unwrap();
        let f = Field::from_fn(25, |v| if v % 7 == 0 { 1.0 } else { 0.1 });
        let x = 6;
        let big = ImprovementParams::new(&ParamInputs {
            p: 2.0,
            p_prime: 1.0,
            q: None,
            kappa: 2.0,
            nu: 2.0,
            c_gamma: 0.5,
            c_a: 1.0,
            doubling: g.space.doubling_constant(),
        })
        .unwrap();
        let tau = feasibility_level(&dom, &f, x, &big).unwrap();
        let cert = essential_estimate_check(&dom, &f, x, &big, tau).unwrap();
        assert!(cert.pass, "{cert:#?}");
        // A light vertex carrying g = 1: every ball around x averages it
        // away, but its singleton ball puts it in E_1, so k = 1 with a large
        // C_Γ breaks the strict bound.
        let s = crate::space::Space::new(
            (0..6).map(|i| (format!("v{i}"), if i == 2 { 0.01 } else { 1.0 })).collect(),
            (0..5).map(|i| (format!("v{i}"), format!("v{}", i + 1), 1.0)).collect(),
        )
        .unwrap();
        let dom = Domain::new(&s, &[0, 1, 2, 3, 4]).unwrap();
        let f = Field::from_fn(6, |v| if v == 2 { 1.0 } else { 0.0 });
        let small = ImprovementParams::with_k(
            &ParamInputs {
                p: 2.0,
                p_prime: 1.0,
                q: Some(1.5),
                kappa: 2.0,
                nu: 2.0,
                c_gamma: 50.0,
                c_a: 1.0,
                doubling: s.doubling_constant(),
            },
            1,
        )
        .unwrap();
        let tau = feasibility_level(&dom, &f, 0, &small).unwrap();
        assert!(essential_estimate_check(&dom, &f, 0, &small, tau * 0.5).is_err());
        let cert = essential_estimate_check(&dom, &f, 0, &small, tau).unwrap();
        let last = cert.stages.last().unwrap();
        assert_eq!(last.kind, "h_maximal_small");
        assert!(!last.pass && !cert.pass);
        assert!(cert.stages[0].pass);
        assert!(!small.k_is_sufficient());
    }
}
