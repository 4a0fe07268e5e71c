//! Named pass/fail/skip check records with the residuals behind them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub details: String,
}

impl Check {
    /// Pass iff `residual <= bound`.
    pub fn bounded(name: impl Into<String>, residual: f64, bound: f64, details: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::from_bool(residual <= bound),
            residual: Some(residual),
            details: details.into(),
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool, details: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::from_bool(ok),
            residual: None,
            details: details.into(),
        }
    }

    pub fn error(name: impl Into<String>, err: &Error) -> Self {
        Check {
            name: name.into(),
            status: Status::Fail,
            residual: None,
            details: err.to_string(),
        }
    }

    pub fn skip(name: impl Into<String>, details: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Skip,
            residual: None,
            details: details.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    /// Overall status fails iff any check fails.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn status(&self) -> Status {
        Status::from_bool(self.passed())
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        for c in &self.checks {
            let residual = c.residual.map(|r| format!(" residual={r:.3e}")).unwrap_or_default();
            let _ = writeln!(out, "  [{}] {}{}  {}", c.status.label(), c.name, residual, c.details);
        }
        let _ = writeln!(out, "overall: {}", self.status().label());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_fails_iff_any_check_fails() {
        let mut r = Report::new("t");
        r.push(Check::bounded("a", 1e-12, 1e-9, ""));
        r.push(Check::skip("b", "not applicable"));
        assert!(r.passed());
        r.push(Check::flag("c", false, ""));
        assert!(!r.passed());
        assert!(r.to_text().contains("[FAIL] c"));
    }
}
