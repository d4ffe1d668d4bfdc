//! Machine-readable verification reports.

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub witness: Value,
}

/// A named list of checks. Timing is kept by the caller so that reports for
/// the same seed compare equal.
#[derive(Clone, Debug, Serialize)]
pub struct TriangleReport {
    pub name: String,
    pub checks: Vec<Check>,
}

impl TriangleReport {
    pub fn new(name: impl Into<String>) -> Self {
        TriangleReport { name: name.into(), checks: Vec::new() }
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool, witness: Value) -> bool {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self.checks.push(Check { name: name.into(), verdict, witness });
        ok
    }

    pub fn inconclusive(&mut self, name: impl Into<String>, witness: Value) {
        self.checks.push(Check { name: name.into(), verdict: Verdict::Inconclusive, witness });
    }

    /// Appends the checks of `other` with names prefixed by `prefix/`.
    pub fn absorb(&mut self, prefix: &str, other: TriangleReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}/{}", c.name);
            self.checks.push(c);
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.checks.iter().any(|c| c.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if self.checks.iter().any(|c| c.verdict == Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.verdict() == Verdict::Pass
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.verdict != Verdict::Pass).collect()
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "schema": 1,
            "name": self.name,
            "verdict": self.verdict(),
            "checks": self.checks,
        })
    }
}
