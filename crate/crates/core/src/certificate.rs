use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Additive slack used when certifying `lhs <= rhs` in double precision.
pub const EPS_NUM: f64 = 1e-9;

/// A path carried by a certificate, rendered with vertex ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathWitness {
    pub label: String,
    pub vertices: Vec<String>,
    pub length: f64,
    pub integral: f64,
}

/// Structured record of one inequality check.
///
/// For inequality kinds `pass` is `lhs <= rhs + eps`; composite
/// certificates additionally require every stage to pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub constants: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<PathWitness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<Certificate>,
    #[serde(skip)]
    rule: Rule,
}

/// How the top-level inequality of a certificate is judged.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
enum Rule {
    /// `lhs <= rhs + ε_num`, with `ε_num` adjustable by [`Certificate::rejudge`].
    #[default]
    Numeric,
    Fixed(f64),
    Strict,
    /// Only the stages count.
    Aggregate,
}

impl Certificate {
    /// `lhs <= rhs + eps`. Passing [`EPS_NUM`] marks the slack as the
    /// numerical one, which [`Certificate::rejudge`] may replace.
    pub fn inequality(kind: impl Into<String>, lhs: f64, rhs: f64, eps: f64) -> Self {
        Self {
            kind: kind.into(),
            lhs,
            rhs,
            pass: holds(lhs, rhs, eps),
            constants: BTreeMap::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
            stages: Vec::new(),
            rule: if eps == EPS_NUM { Rule::Numeric } else { Rule::Fixed(eps) },
        }
    }

    /// Strict variant: `lhs < rhs`.
    pub fn strict(kind: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let mut c = Self::inequality(kind, lhs, rhs, 0.0);
        c.pass = lhs < rhs;
        c.rule = Rule::Strict;
        c
    }

    /// A certificate that passes iff all of its stages pass; `lhs` and `rhs`
    /// are informational.
    pub fn aggregate(kind: impl Into<String>) -> Self {
        let mut c = Self::inequality(kind, 0.0, 0.0, 0.0);
        c.rule = Rule::Aggregate;
        c
    }

    /// Re-evaluates `pass` throughout the tree with numerical slack `eps_num`.
    pub fn rejudge(&mut self, eps_num: f64) -> bool {
        let own = match self.rule {
            Rule::Numeric => holds(self.lhs, self.rhs, eps_num),
            Rule::Fixed(eps) => holds(self.lhs, self.rhs, eps),
            Rule::Strict => self.lhs < self.rhs,
            Rule::Aggregate => true,
        };
        let mut pass = own;
        for s in &mut self.stages {
            pass &= s.rejudge(eps_num);
        }
        self.pass = pass;
        pass
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn push_stage(&mut self, stage: Certificate) {
        if !stage.pass {
            self.pass = false;
        }
        self.stages.push(stage);
    }

    /// `rhs - lhs`.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// First failing stage in depth-first order, or `self` if only the
    /// top-level inequality fails.
    pub fn first_failure(&self) -> Option<&Certificate> {
        if self.pass {
            return None;
        }
        self.stages
            .iter()
            .find_map(|s| s.first_failure())
            .or(Some(self))
    }
}

/// `lhs <= rhs + eps`, treating an infinite `rhs` as satisfied and NaN as
/// failure.
pub fn holds(lhs: f64, rhs: f64, eps: f64) -> bool {
    if lhs.is_nan() || rhs.is_nan() {
        return false;
    }
    lhs <= rhs + eps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_semantics() {
        assert!(Certificate::inequality("t", 1.0, 1.0 - 1e-10, EPS_NUM).pass);
        assert!(!Certificate::inequality("t", 1.0, 0.99, EPS_NUM).pass);
        assert!(Certificate::inequality("t", 1e300, f64::INFINITY, 0.0).pass);
        assert!(!Certificate::inequality("t", f64::NAN, 1.0, 0.0).pass);
        assert!(!Certificate::strict("t", 1.0, 1.0).pass);
    }

    #[test]
    fn failing_stage_propagates() {
        let mut top = Certificate::inequality("top", 0.0, 1.0, 0.0);
        top.push_stage(Certificate::inequality("ok", 0.0, 1.0, 0.0));
        assert!(top.pass);
        top.push_stage(Certificate::inequality("bad", 2.0, 1.0, 0.0));
        assert!(!top.pass);
        assert_eq!(top.first_failure().unwrap().kind, "bad");
    }

    #[test]
    fn rejudge_only_moves_numeric_slack() {
        let mut top = Certificate::aggregate("top");
        top.push_stage(Certificate::inequality("num", 1.0 + 1e-6, 1.0, EPS_NUM));
        top.push_stage(Certificate::inequality("fixed", 1.0 + 1e-6, 1.0, 1e-3));
        top.push_stage(Certificate::strict("strict", 0.5, 1.0));
        assert!(!top.pass);
        assert!(top.rejudge(1e-5));
        assert!(top.stages.iter().all(|s| s.pass));
        assert!(!top.rejudge(0.0));
        assert_eq!(top.first_failure().unwrap().kind, "num");
        assert!(top.stages[1].pass && top.stages[2].pass);
    }
}
