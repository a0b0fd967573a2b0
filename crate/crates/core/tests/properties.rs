use proptest::prelude::*;

use hardy_core::alpha::{alpha_optimize, AlphaBruteProfile, AlphaOptions, AlphaQuery};
use hardy_core::curves::{
    brute_force_min_path, inf_connection_potential, is_upper_gradient, min_integral_path, path_integral,
    CurveFamilyQuery,
};
use hardy_core::gen::{random_connected, Generated, RandomGraph};
use hardy_core::hardy::{cgamma_upper_bound, hardy_parts, pointwise_hardy_check, HardyParams};
use hardy_core::maximal::maximal;
use hardy_core::poincare::{ca_upper_bound, two_point_parts};
use hardy_core::rng::SplitMix64;
use hardy_core::selfimprove::gaps::level_usage;
use hardy_core::selfimprove::{
    essential_estimate_check, feasibility_level, gap_decompose, level_sets, ImprovementParams, ParamInputs,
};
use hardy_core::{Domain, Exec, Field, EPS_NUM};

fn instance(seed: u64, max_vertices: usize) -> (Generated, SplitMix64) {
    let mut rng = SplitMix64::new(seed);
    let cfg = RandomGraph {
        max_vertices,
        ..RandomGraph::default()
    };
    (random_connected(&cfg, &mut rng).unwrap(), rng)
}

fn unit_field(rng: &mut SplitMix64, n: usize) -> Field {
    Field::from_fn(n, |_| if rng.chance(0.25) { 0.0 } else { rng.next_f64() })
}

fn params(doubling: f64, c_gamma: f64, c_a: f64) -> ImprovementParams {
    ImprovementParams::new(&ParamInputs {
        p: 2.0,
        p_prime: 1.0,
        q: None,
        kappa: 2.0,
        nu: 2.0,
        c_gamma,
        c_a,
        doubling,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms_and_open_balls(seed in any::<u64>(), t in 0.01f64..1.0) {
        let (g, _) = instance(seed, 12);
        let s = &g.space;
        for x in s.vertices() {
            prop_assert_eq!(s.dist(x, x), 0.0);
            for y in s.vertices() {
                prop_assert_eq!(s.dist(x, y), s.dist(y, x));
                for z in s.vertices() {
                    prop_assert!(s.dist(x, z) <= s.dist(x, y) + s.dist(y, z) + 1e-12);
                }
            }
            let r = t * s.diameter() + 1e-3;
            let b = s.ball(x, r).unwrap();
            for v in s.vertices() {
                prop_assert_eq!(b.contains(v), s.dist(x, v) < r);
            }
            prop_assert!((b.measure(s) - s.ball_measure(x, r)).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_constant_bounds_every_ball(seed in any::<u64>(), t in 0.001f64..1.5) {
        let (g, _) = instance(seed, 12);
        let s = &g.space;
        let d = s.doubling_constant();
        prop_assert!(d >= 1.0);
        for x in s.vertices() {
            let r = t * s.diameter();
            prop_assert!(s.ball_measure(x, 2.0 * r) <= d * s.ball_measure(x, r) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn maximal_monotone_and_bounded(seed in any::<u64>(), p in 1.0f64..3.0, dp in 0.0f64..2.0, t in 0.0f64..1.0) {
        let (g, mut rng) = instance(seed, 12);
        let s = &g.space;
        let f = Field::from_fn(s.len(), |_| rng.range(-2.0, 2.0));
        let r = t * s.diameter();
        for x in s.vertices() {
            let m = maximal(s, &f, p, r, x).unwrap();
            prop_assert!(m >= f.get(x).abs() - 1e-12);
            prop_assert!(m <= f.sup_abs() + 1e-12);
            prop_assert!(maximal(s, &f, p, 2.0 * r + 0.1, x).unwrap() >= m - 1e-12);
            prop_assert!(maximal(s, &f, p + dp, r, x).unwrap() >= m - 1e-12);
        }
    }

    #[test]
    fn label_setting_matches_enumeration(seed in any::<u64>(), nu in 1.0f64..3.0) {
        let (g, mut rng) = instance(seed, 9);
        let s = &g.space;
        let w = unit_field(&mut rng, s.len());
        let dom = Domain::new(s, &g.omega).unwrap();
        for x in dom.omega() {
            let q = CurveFamilyQuery::to_complement(&dom, x, nu);
            let fast = min_integral_path(s, &w, &q).unwrap();
            let slow = brute_force_min_path(s, &w, &q).unwrap();
            prop_assert!((fast.value - slow.value).abs() <= 1e-9);
            prop_assert!((path_integral(s, &w, &fast.path) - fast.value).abs() <= 1e-12);
            prop_assert!(fast.path.length() <= q.budget(s) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn potential_has_h_as_upper_gradient(seed in any::<u64>()) {
        let (g, mut rng) = instance(seed, 12);
        let dom = Domain::new(&g.space, &g.omega).unwrap();
        let h = unit_field(&mut rng, g.space.len());
        let u = inf_connection_potential(&dom, &h).unwrap();
        prop_assert!(dom.complement().all(|v| u.get(v) == 0.0));
        prop_assert!(is_upper_gradient(&g.space, &u, &h, 1e-12));
        for x in dom.omega() {
            // The unconstrained infimum is below every constrained one.
            let m = min_integral_path(&g.space, &h, &CurveFamilyQuery::to_complement(&dom, x, 1.5)).unwrap();
            prop_assert!(u.get(x) <= m.value + 1e-12);
        }
    }

    #[test]
    fn hardy_check_monotone_in_p(seed in any::<u64>(), p in 1.0f64..3.0, c_h in 0.1f64..4.0) {
        let (g, mut rng) = instance(seed, 12);
        let dom = Domain::new(&g.space, &g.omega).unwrap();
        let n = g.space.len();
        let u = Field::from_fn(n, |v| if dom.contains(v) { rng.range(-1.0, 1.0) } else { 0.0 });
        let grad = unit_field(&mut rng, n);
        for x in dom.omega() {
            let at = |p| pointwise_hardy_check(&dom, &u, &grad, &HardyParams { p, c_h, kappa: 2.0 }, x).unwrap();
            let (lo, hi) = (at(p), at(p + 0.7));
            prop_assert!(hi.rhs >= lo.rhs - 1e-12);
            if lo.lhs <= lo.rhs + EPS_NUM {
                prop_assert!(hi.lhs <= hi.rhs + EPS_NUM);
            }
        }
    }

    #[test]
    fn certified_constants_dominate_ratios(seed in any::<u64>(), p in 1.0f64..3.0, nu in 1.0f64..3.0) {
        let (g, mut rng) = instance(seed, 10);
        let s = &g.space;
        let dom = Domain::new(s, &g.omega).unwrap();
        let ca = ca_upper_bound(s, 2.0).unwrap();
        let cg = cgamma_upper_bound(&dom, 2.0).unwrap();
        let grad = unit_field(&mut rng, s.len());
        for x in s.vertices() {
            for y in x + 1..s.len() {
                let t = two_point_parts(s, &grad, x, y, p, nu.max(1.0 + 1e-9), 2.0).unwrap();
                prop_assert!(t.min_path.value <= ca * t.base + 1e-9);
            }
        }
        for x in dom.omega() {
            let t = hardy_parts(&dom, &grad, p, nu.max(1.0 + 1e-9), 2.0, x).unwrap();
            prop_assert!(t.min_path.value <= cg * t.base() + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn alpha_brute_scaling_and_optimizer_bracket(seed in any::<u64>(), p in 1.0f64..3.0, tau in 0.0f64..1.5) {
        let (g, _) = instance(seed, 5);
        let dom = Domain::new(&g.space, &g.omega).unwrap();
        let profile = AlphaBruteProfile::new(&dom, 2.0, 1.5, p, 3, None, Exec::Sequential).unwrap();
        let a = profile.alpha(tau);
        prop_assert!(a <= 2.0);
        prop_assert!(profile.alpha(2.0 * tau) <= 2.0 * a);
        prop_assert!(profile.alpha(tau + 0.1) >= a);
        let est = alpha_optimize(&dom, &AlphaQuery { nu: 2.0, kappa: 1.5, tau, p, x: None }, &AlphaOptions::default()).unwrap();
        prop_assert!(a <= est.upper() + 1e-6, "brute {} above optimizer upper {}", a, est.upper());
    }

    #[test]
    fn level_sets_nested_and_essential_holds(seed in any::<u64>(), scale in 1.0f64..4.0) {
        let (g, mut rng) = instance(seed, 12);
        let dom = Domain::new(&g.space, &g.omega).unwrap();
        let pr = params(g.space.doubling_constant(), 1.0, 1.0);
        let f = unit_field(&mut rng, g.space.len());
        let omega: Vec<_> = dom.omega().collect();
        let x = omega[rng.below(omega.len())];
        let level = feasibility_level(&dom, &f, x, &pr).unwrap();
        let tau = (level * scale).max(1e-3);
        let ls = level_sets(&dom, &f, x, &pr, tau).unwrap();
        let sets = ls.nonempty();
        for w in sets.windows(2) {
            prop_assert!((0..w[0].len()).all(|z| !w[1][z] || w[0][z]));
        }
        prop_assert!(!ls.contains(1, x));
        prop_assert!(dom.complement().all(|v| ls.counts[v] == 0));
        let cert = essential_estimate_check(&dom, &f, x, &pr, tau).unwrap();
        prop_assert!(cert.pass, "{:?}", cert.first_failure());
    }

    #[test]
    fn pigeonhole_and_gap_sum(seed in any::<u64>()) {
        let (g, mut rng) = instance(seed, 12);
        let dom = Domain::new(&g.space, &g.omega).unwrap();
        let pr = params(g.space.doubling_constant(), 1.0, 1.0);
        let f = unit_field(&mut rng, g.space.len());
        let omega: Vec<_> = dom.omega().collect();
        let x = omega[rng.below(omega.len())];
        let tau = feasibility_level(&dom, &f, x, &pr).unwrap().max(1e-3);
        let ls = level_sets(&dom, &f, x, &pr, tau).unwrap();
        let h = ls.h(&pr);
        let d = dom.dist_to_complement(x).unwrap();
        let gamma0 = min_integral_path(&g.space, &h, &CurveFamilyQuery::to_complement(&dom, x, pr.nu)).unwrap();
        prop_assume!(gamma0.value <= pr.delta * d);
        let depth = ls.depth();
        let i0 = (1..=pr.k.min(depth + 1)).find(|&i| {
            level_usage(&dom, &gamma0.path, &ls.mask(i)).0 <= pr.level_budget(i, d) + EPS_NUM
        });
        prop_assert!(i0.is_some());
        let i0 = i0.unwrap();
        let dec = gap_decompose(&dom, &gamma0.path, &ls.mask(i0), i0, &pr).unwrap();
        let touched = level_usage(&dom, &gamma0.path, &ls.mask(i0)).1;
        prop_assert!(dec.distance_sum <= touched + 1e-12);
        for gap in dec.gaps.iter().chain(dec.final_gap.iter()) {
            prop_assert!(gap.d <= gap.length + 1e-12);
            prop_assert!(!ls.contains(i0, gamma0.path.vertices()[gap.a]));
        }
    }
}
