//! Built-in verification suites.

pub mod algebra;
pub mod flows;
pub mod suites;

use std::fmt;

use serde::Serialize;

pub use suites::{run_suite, SUITES};

/// One measured quantity against its acceptance bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable bound, e.g. `< 1e-6`.
    pub expected: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl VerificationReport {
    pub fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            checks: Vec::new(),
            overall: true,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, measured: f64, expected: impl Into<String>, pass: bool) {
        // NaN never passes
        let pass = pass && !measured.is_nan();
        self.overall &= pass;
        self.checks.push(Check {
            name: name.into(),
            measured,
            expected: expected.into(),
            pass,
        });
    }

    /// `measured <= bound`.
    pub fn at_most(&mut self, name: impl Into<String>, measured: f64, bound: f64) {
        self.push(name, measured, format!("<= {bound:e}"), measured <= bound);
    }

    /// `measured >= bound`.
    pub fn at_least(&mut self, name: impl Into<String>, measured: f64, bound: f64) {
        self.push(name, measured, format!(">= {bound}"), measured >= bound);
    }

    /// `|measured − target| <= rel·|target|`.
    pub fn within(&mut self, name: impl Into<String>, measured: f64, target: f64, rel: f64) {
        let pass = (measured - target).abs() <= rel * target.abs();
        self.push(name, measured, format!("{target} ± {}%", rel * 100.0), pass);
    }

    /// Exact equality.
    pub fn equals(&mut self, name: impl Into<String>, measured: f64, target: f64) {
        self.push(name, measured, format!("== {target}"), measured == target);
    }

    pub fn merge(&mut self, other: VerificationReport) {
        for c in other.checks {
            self.overall &= c.pass;
            self.checks.push(c);
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        writeln!(f, "suite: {}", self.suite)?;
        writeln!(f, "{:<width$}  {:>14}  {:<22}  result", "check", "measured", "expected")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<width$}  {:>14.6e}  {:<22}  {}",
                c.name,
                c.measured,
                c.expected,
                if c.pass { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.overall { "PASS" } else { "FAIL" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_is_conjunction() {
        let mut r = VerificationReport::new("x");
        r.at_most("a", 1.0, 2.0);
        assert!(r.overall);
        r.at_least("b", 1.0, 2.0);
        assert!(!r.overall);
        r.at_most("c", f64::NAN, 2.0);
        assert!(!r.checks[2].pass);
        let text = r.to_string();
        assert!(text.contains("FAIL") && text.contains("overall: FAIL"));
    }
}
