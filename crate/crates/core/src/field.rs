use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::{Space, Vertex};

/// A real value per vertex. Plays the roles of test functions, candidate
/// gradients and potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field(Vec<f64>);

/// On-disk form of a field (JSON), keyed by vertex id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    pub values: BTreeMap<String, f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Field(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn from_fn(n: usize, f: impl FnMut(Vertex) -> f64) -> Self {
        Field((0..n).map(f).collect())
    }

    /// Indicator of a vertex mask.
    pub fn indicator(mask: &[bool]) -> Self {
        Field(mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> f64 {
        self.0[v]
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field(self.0.iter().map(|v| v * c).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn sup_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn check_len(&self, space: &Space) -> Result<()> {
        if self.len() != space.len() {
            return Err(invalid(format!(
                "field has {} values but the space has {} vertices",
                self.len(),
                space.len()
            )));
        }
        if self.0.iter().any(|v| !v.is_finite()) {
            return Err(invalid("field values must be finite"));
        }
        Ok(())
    }

    pub fn check_nonnegative(&self, space: &Space, what: &str) -> Result<()> {
        self.check_len(space)?;
        if let Some(v) = self.0.iter().position(|&x| x < 0.0) {
            return Err(invalid(format!(
                "{what} must be non-negative, found {} at `{}`",
                self.0[v],
                space.id(v)
            )));
        }
        Ok(())
    }

    /// Gradient candidates take values in `[0, 1]`.
    pub fn check_gradient(&self, space: &Space) -> Result<()> {
        self.check_nonnegative(space, "gradient field")?;
        if let Some(v) = self.0.iter().position(|&x| x > 1.0) {
            return Err(invalid(format!(
                "gradient field must be at most 1, found {} at `{}`",
                self.0[v],
                space.id(v)
            )));
        }
        Ok(())
    }

    pub fn from_file(space: &Space, file: &FieldFile) -> Result<Self> {
        let mut values = vec![f64::NAN; space.len()];
        for (id, &val) in &file.values {
            values[space.vertex(id)?] = val;
        }
        if let Some(v) = values.iter().position(|x| x.is_nan()) {
            return Err(Error::Parse(format!("field is missing vertex `{}`", space.id(v))));
        }
        let f = Field(values);
        f.check_len(space)?;
        Ok(f)
    }

    pub fn from_json(space: &Space, text: &str) -> Result<Self> {
        let file: FieldFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(space, &file)
    }

    pub fn to_file(&self, space: &Space) -> FieldFile {
        FieldFile {
            values: space
                .vertices()
                .map(|v| (space.id(v).to_string(), self.0[v]))
                .collect(),
        }
    }
}
