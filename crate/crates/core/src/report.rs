//! Named residuals produced by identity checks.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Sup-norm residual, always non-negative (NaN marks a failed evaluation).
    pub residual: f64,
}

impl Check {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.residual <= tolerance
    }
}

/// Insertion-ordered map from identity name to residual, plus free-form notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `|residual|`; a repeated name overwrites the earlier value.
    pub fn push(&mut self, name: impl Into<String>, residual: f64) {
        let name = name.into();
        let residual = residual.abs();
        match self.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => c.residual = residual,
            None => self.checks.push(Check { name, residual }),
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Appends every check of `other` under `prefix.`.
    pub fn merge(&mut self, prefix: &str, other: &Report) {
        for c in &other.checks {
            let name = if prefix.is_empty() { c.name.clone() } else { [prefix, ".", &c.name].concat() };
            self.push(name, c.residual);
        }
        for n in &other.notes {
            self.notes.push(n.to_string());
        }
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.residual)
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |a, c| if c.residual.is_nan() { f64::NAN } else { a.max(c.residual) })
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.checks.iter().all(|c| c.passes(tolerance))
    }

    pub fn failing(&self, tolerance: f64) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| !c.passes(tolerance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_overwrite() {
        let mut r = Report::new();
        r.push("b", 1e-3);
        r.push("a", -2e-14);
        r.push("b", 1e-15);
        let names: Vec<&str> = r.checks().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["b", "a"]);
        assert_eq!(r.get("a"), Some(2e-14));
        assert!(r.passes(1e-13));
    }

    #[test]
    fn nan_never_passes() {
        let mut r = Report::new();
        r.push("x", f64::NAN);
        assert!(!r.passes(1.0));
        assert!(r.max_residual().is_nan());
    }
}
