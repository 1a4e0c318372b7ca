//! Pinned fitted constants and the regression comparison against them.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{EislabError, Result};

pub const DEFAULT_BASELINES: &str = include_str!("../../baselines/baselines.toml");
/// Allowed relative drift of a measured constant from its pinned value.
pub const REGRESSION_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    #[serde(flatten)]
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineCheck {
    pub name: String,
    pub pinned: Option<f64>,
    pub measured: f64,
    pub pass: bool,
}

impl Baselines {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| EislabError::Domain(format!("baseline file: {e}")))
    }

    pub fn embedded() -> Self {
        Self::parse(DEFAULT_BASELINES).expect("embedded baselines parse")
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| EislabError::Domain(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)
            }
            None => Ok(Self::embedded()),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    /// Two-sided: a drift either way means the computation changed.
    pub fn check(&self, name: &str, measured: f64) -> BaselineCheck {
        let pinned = self.get(name);
        let pass = match pinned {
            Some(p) => measured.is_finite() && (measured - p).abs() <= REGRESSION_TOLERANCE * p.abs(),
            None => false,
        };
        BaselineCheck { name: name.to_string(), pinned, measured, pass }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_window() {
        let b = Baselines::parse("a = 2.0\n").unwrap();
        assert!(b.check("a", 2.09).pass);
        assert!(!b.check("a", 2.11).pass);
        assert!(!b.check("a", 1.89).pass);
        assert!(!b.check("missing", 1.0).pass);
        assert!(!b.check("a", f64::NAN).pass);
        assert!(Baselines::parse("a = \"x\"").is_err());
    }
}
