//! Deterministic families of gradient candidates in `[0, 1]` used by the
//! constant estimators.
//!
//! Trial `t` draws from `SplitMix64::stream(seed, t)` only, so the first `n`
//! samples are the same for every trial budget `>= n`. Trial 0 is `g ≡ 1`.

use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::field::Field;
use crate::rng::SplitMix64;
use crate::space::{Domain, Space, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Constant,
    IndicatorBlend,
    DistanceBump,
    UniformNoise,
    Annulus,
    CorridorComplement,
}

/// Families available on a bare space.
pub const SPACE_FAMILIES: [Family; 3] = [Family::IndicatorBlend, Family::DistanceBump, Family::UniformNoise];

/// Families used when a domain is available.
pub const DOMAIN_FAMILIES: [Family; 5] = [
    Family::IndicatorBlend,
    Family::DistanceBump,
    Family::UniformNoise,
    Family::Annulus,
    Family::CorridorComplement,
];

/// The `t`-th sample for `seed`, cycling through `families`.
pub fn sample(space: &Space, domain: Option<&Domain<'_>>, families: &[Family], seed: u64, t: u64) -> (Family, Field) {
    if t == 0 || families.is_empty() {
        return (Family::Constant, Field::constant(space.len(), 1.0));
    }
    let family = families[((t - 1) % families.len() as u64) as usize];
    let mut rng = SplitMix64::stream(seed, t);
    let n = space.len();
    let values = match family {
        Family::Constant => vec![1.0; n],
        Family::IndicatorBlend => {
            let density = rng.range(0.15, 0.85);
            let high = rng.range(0.5, 1.0);
            let low = rng.range(0.0, 0.25);
            (0..n).map(|_| if rng.chance(density) { high } else { low }).collect()
        }
        Family::DistanceBump => {
            let c = rng.below(n);
            let radius = rng.range(0.25, 1.0) * space.diameter();
            let inverted = rng.chance(0.5);
            (0..n)
                .map(|v| {
                    let b = (1.0 - space.dist(c, v) / radius).max(0.0);
                    if inverted {
                        1.0 - b
                    } else {
                        b
                    }
                })
                .collect()
        }
        Family::UniformNoise => (0..n).map(|_| rng.next_f64()).collect(),
        Family::Annulus => {
            let centers: Vec<Vertex> = match domain {
                Some(d) => d.omega().collect(),
                None => space.vertices().collect(),
            };
            let c = centers[rng.below(centers.len())];
            let reach = domain.map_or(space.diameter(), |d| d.complement_distance(c));
            let inner = rng.range(0.0, 1.0) * reach;
            let outer = inner + rng.range(0.1, 1.0) * reach;
            (0..n)
                .map(|v| {
                    let r = space.dist(c, v);
                    if r >= inner && r < outer {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        Family::CorridorComplement => {
            let mut values = vec![1.0; n];
            let start = match domain {
                Some(d) => {
                    let omega: Vec<Vertex> = d.omega().collect();
                    omega[rng.below(omega.len())]
                }
                None => rng.below(n),
            };
            // A random greedy descent toward the complement (or a random
            // walk without a domain) marks the corridor where g vanishes.
            let steps = n;
            let mut v = start;
            values[v] = 0.0;
            for _ in 0..steps {
                if domain.is_some_and(|d| !d.contains(v)) {
                    break;
                }
                let nbrs = space.neighbors(v);
                let next = match domain {
                    Some(d) => {
                        let here = d.complement_distance(v);
                        let down: Vec<Vertex> = nbrs
                            .iter()
                            .map(|&(w, _)| w)
                            .filter(|&w| d.complement_distance(w) < here)
                            .collect();
                        if down.is_empty() {
                            nbrs[rng.below(nbrs.len())].0
                        } else {
                            down[rng.below(down.len())]
                        }
                    }
                    None => nbrs[rng.below(nbrs.len())].0,
                };
                v = next;
                values[v] = 0.0;
            }
            values
        }
    };
    (family, Field::new(values))
}

/// Budget and determinism controls shared by the constant estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub exec: Exec,
    /// Fields evaluated in addition to the sampled ones (clipped to `[0, 1]`
    /// after scaling by their supremum).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<Field>,
}

impl EstimateOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            exec: Exec::default(),
            extra: Vec::new(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_extra(mut self, extra: Vec<Field>) -> Self {
        self.extra = extra;
        self
    }

    /// Every candidate in evaluation order: sampled trials, then extras.
    pub(crate) fn candidates(&self, space: &Space, domain: Option<&Domain<'_>>, families: &[Family]) -> Vec<(String, Field)> {
        let mut out: Vec<(String, Field)> = (0..self.trials)
            .map(|t| {
                let (fam, g) = sample(space, domain, families, self.seed, t);
                (format!("trial {t} ({})", family_name(fam)), g)
            })
            .collect();
        for (i, f) in self.extra.iter().enumerate() {
            let sup = f.sup_abs();
            let g = if sup > 0.0 {
                f.map(|v| (v.abs() / sup).clamp(0.0, 1.0))
            } else {
                Field::zeros(f.len())
            };
            out.push((format!("extra {i}"), g));
        }
        out
    }
}

pub fn family_name(f: Family) -> &'static str {
    match f {
        Family::Constant => "constant",
        Family::IndicatorBlend => "indicator_blend",
        Family::DistanceBump => "distance_bump",
        Family::UniformNoise => "uniform_noise",
        Family::Annulus => "annulus",
        Family::CorridorComplement => "corridor_complement",
    }
}

/// An empirical supremum of a ratio and where it was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub candidates: usize,
    pub argmax: Option<String>,
    pub points: Vec<String>,
}

impl ConstantEstimate {
    /// Max-merge in candidate order; ties keep the earlier candidate.
    pub(crate) fn merge(parts: Vec<(String, f64, Vec<String>)>) -> Self {
        let candidates = parts.len();
        let mut best = ConstantEstimate {
            value: 0.0,
            candidates,
            argmax: None,
            points: Vec::new(),
        };
        for (label, value, points) in parts {
            if value > best.value || value.is_nan() {
                best.value = value;
                best.argmax = Some(label);
                best.points = points;
                if value.is_nan() {
                    break;
                }
            }
        }
        best
    }
}
