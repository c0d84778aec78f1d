use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Which inequality a report tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|lhs - rhs| <= sigma_level * stderr`
    TwoSided,
    /// `lhs <= rhs + sigma_level * stderr`
    AtMost,
    /// `lhs >= rhs - sigma_level * stderr`
    AtLeast,
    /// Descriptive only; always passes.
    Describe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Pass,
    Fail,
}

/// Outcome of one statistical check. The decision is a pure function of
/// the recorded numbers, see [`TestReport::recompute`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub sigma_level: f64,
    pub comparison: Comparison,
    pub decision: Decision,
    pub seeds: Vec<u64>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl TestReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, stderr: f64, comparison: Comparison, n: usize) -> Self {
        let mut r = Self {
            name: name.into(),
            lhs,
            rhs,
            stderr,
            sigma_level: 3.0,
            comparison,
            decision: Decision::Fail,
            seeds: Vec::new(),
            n,
            details: BTreeMap::new(),
        };
        r.decision = r.recompute();
        r
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma_level = sigma;
        self.decision = self.recompute();
        self
    }

    pub fn with_seeds(mut self, seeds: impl IntoIterator<Item = u64>) -> Self {
        self.seeds = seeds.into_iter().collect();
        self
    }

    pub fn with_detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    /// Decision implied by the recorded values. NaN values fail.
    pub fn recompute(&self) -> Decision {
        let slack = self.sigma_level * self.stderr;
        let ok = match self.comparison {
            Comparison::TwoSided => (self.lhs - self.rhs).abs() <= slack,
            Comparison::AtMost => self.lhs <= self.rhs + slack,
            Comparison::AtLeast => self.lhs >= self.rhs - slack,
            Comparison::Describe => true,
        };
        if ok {
            Decision::Pass
        } else {
            Decision::Fail
        }
    }

    pub fn passed(&self) -> bool {
        self.decision == Decision::Pass
    }

    /// Distance from the decision boundary in units of the standard error.
    pub fn sigmas(&self) -> f64 {
        (self.lhs - self.rhs) / self.stderr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decisions_follow_values() {
        assert!(TestReport::new("a", 1.0, 1.2, 0.1, Comparison::TwoSided, 10).passed());
        assert!(!TestReport::new("a", 1.0, 1.4, 0.1, Comparison::TwoSided, 10).passed());
        assert!(TestReport::new("a", 1.25, 1.0, 0.1, Comparison::AtMost, 10).passed());
        assert!(!TestReport::new("a", 0.6, 1.0, 0.1, Comparison::AtLeast, 10).passed());
        assert!(!TestReport::new("a", f64::NAN, 1.0, 0.1, Comparison::AtMost, 10).passed());
        let r = TestReport::new("a", 1.0, 1.0, 0.0, Comparison::TwoSided, 1).with_seeds([7]);
        let back: TestReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.recompute(), back.decision);
    }
}
