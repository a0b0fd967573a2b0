pub mod alpha;
pub mod gen;
pub mod hardy;
pub mod improve;
pub mod maximal;
pub mod poincare;

use std::path::Path;

use anyhow::Result;

use hardy_core::sampling::{family_name, sample, DOMAIN_FAMILIES, SPACE_FAMILIES};
use hardy_core::{Domain, Field, Space};

use crate::io;

/// A gradient candidate and the label it is reported under.
pub struct Candidate {
    pub label: String,
    pub g: Field,
}

/// The given field, or `trials` sampled ones (domain families when a domain
/// is available).
pub fn candidates(space: &Space, domain: Option<&Domain<'_>>, given: Option<&Path>, trials: u64, seed: u64) -> Result<Vec<Candidate>> {
    if let Some(path) = given {
        return Ok(vec![Candidate {
            label: "given".into(),
            g: io::load_field(space, path)?,
        }]);
    }
    let families: &[_] = if domain.is_some() { &DOMAIN_FAMILIES } else { &SPACE_FAMILIES };
    Ok((0..trials)
        .map(|t| {
            let (fam, g) = sample(space, domain, families, seed, t);
            Candidate {
                label: format!("trial {t} ({})", family_name(fam)),
                g,
            }
        })
        .collect())
}

/// For every row position, the candidate whose row has the largest ratio.
/// Ties keep the earlier candidate.
pub fn worst_rows<R: Clone>(tables: &[Vec<R>], ratio: impl Fn(&R) -> f64) -> Vec<(usize, R)> {
    let Some(first) = tables.first() else {
        return Vec::new();
    };
    (0..first.len())
        .map(|i| {
            let mut best = 0;
            for (c, t) in tables.iter().enumerate().skip(1) {
                if ratio(&t[i]) > ratio(&tables[best][i]) {
                    best = c;
                }
            }
            (best, tables[best][i].clone())
        })
        .collect()
}

/// The largest finite-or-infinite ratio, ignoring NaN; 0 when empty.
pub fn max_ratio<'a>(ratios: impl Iterator<Item = &'a f64>) -> f64 {
    ratios.copied().filter(|r| !r.is_nan()).fold(0.0, f64::max)
}
