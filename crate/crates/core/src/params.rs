//! Named, box-bounded parameter vectors shared by every model family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound used for positivity-constrained parameters.
pub const POSITIVE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Ordered list of named parameters with box bounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamVector {
    entries: Vec<ParamEntry>,
}

impl ParamVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an entry; fails on duplicate names, inverted bounds or a value
    /// outside the bounds.
    pub fn push(&mut self, name: &str, value: f64, lower: f64, upper: f64) -> Result<()> {
        if self.entries.iter().any(|e| e.name == name) {
            return Err(Error::Domain(format!("duplicate parameter name `{name}`")));
        }
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::Domain(format!(
                "invalid bounds [{lower}, {upper}] for `{name}`"
            )));
        }
        if !value.is_finite() || value < lower || value > upper {
            return Err(Error::InvalidParameter {
                name: name.to_string(),
                value,
                reason: "outside parameter bounds",
            });
        }
        self.entries.push(ParamEntry {
            name: name.to_string(),
            value,
            lower,
            upper,
        });
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64, lower: f64, upper: f64) -> Result<Self> {
        self.push(name, value, lower, upper)?;
        Ok(self)
    }

    /// A positive parameter with the default lower bound `POSITIVE_EPS`.
    pub fn with_positive(self, name: &str, value: f64) -> Result<Self> {
        self.with(name, value, POSITIVE_EPS, f64::INFINITY)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lower).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.upper).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }

    /// Replaces all values, checking the bounds.
    pub fn set_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.entries.len() {
            return Err(Error::Domain(format!(
                "expected {} values, got {}",
                self.entries.len(),
                values.len()
            )));
        }
        for (e, &v) in self.entries.iter().zip(values) {
            if !v.is_finite() || v < e.lower || v > e.upper {
                return Err(Error::InvalidParameter {
                    name: e.name.clone(),
                    value: v,
                    reason: "outside parameter bounds",
                });
            }
        }
        for (e, &v) in self.entries.iter_mut().zip(values) {
            e.value = v;
        }
        Ok(())
    }

    /// Copy with every bound replaced by `[lower, upper]` intersected with the
    /// current bounds.
    pub fn tightened(&self, lower: f64, upper: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let lo = e.lower.max(lower);
                let hi = e.upper.min(upper);
                ParamEntry {
                    name: e.name.clone(),
                    value: e.value.clamp(lo, hi),
                    lower: lo,
                    upper: hi,
                }
            })
            .collect();
        Self { entries }
    }
}

/// Clamps `x` into the box `[lower, upper]` componentwise.
pub fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(lo, hi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_names() {
        let p = ParamVector::new().with_positive("k", 1.0).unwrap();
        assert!(p.with_positive("k", 2.0).is_err());
    }

    #[test]
    fn rejects_out_of_bounds() {
        assert!(ParamVector::new().with_positive("k", 0.0).is_err());
        assert!(ParamVector::new().with("w", 1.5, 0.0, 1.0).is_err());
        let mut p = ParamVector::new().with_positive("k", 1.0).unwrap();
        assert!(p.set_values(&[-1.0]).is_err());
        assert_eq!(p.get("k"), Some(1.0));
    }

    #[test]
    fn projection_clamps() {
        let mut x = [-1.0, 0.5, 9.0];
        project(&mut x, &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]);
        assert_eq!(x, [0.0, 0.5, 1.0]);
    }
}
