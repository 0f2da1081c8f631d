//! Property reports: structured JSON plus a plain-text table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub case: String,
    pub observed: f64,
    pub expected: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub suite: String,
    pub cases_run: usize,
    pub violations: Vec<Violation>,
    pub seed: u64,
    pub config: serde_json::Value,
    /// Generated sequences whose limit has no independent evaluator.
    pub untestable_limits: usize,
    /// Suite-specific summary numbers, e.g. the largest cross-route gap.
    pub metrics: BTreeMap<String, f64>,
}

impl PropertyReport {
    pub fn new(suite: impl Into<String>, seed: u64, config: serde_json::Value) -> Self {
        Self {
            suite: suite.into(),
            cases_run: 0,
            violations: Vec::new(),
            seed,
            config,
            untestable_limits: 0,
            metrics: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Records a case; `ok` decides whether it is a violation.
    pub fn record(&mut self, case: impl Into<String>, observed: f64, expected: f64, slack: f64, ok: bool) {
        self.cases_run += 1;
        if !ok {
            self.violations.push(Violation {
                case: case.into(),
                observed,
                expected,
                slack,
            });
        }
    }

    /// Checks `observed ≈ expected` within `tol`.
    pub fn expect_eq(&mut self, case: impl Into<String>, observed: f64, expected: f64, tol: f64) {
        let gap = (observed - expected).abs();
        self.record(case, observed, expected, tol - gap, gap <= tol);
    }

    /// Checks `observed ≤ bound + tol`.
    pub fn expect_le(&mut self, case: impl Into<String>, observed: f64, bound: f64, tol: f64) {
        self.record(case, observed, bound, bound - observed, observed <= bound + tol);
    }

    pub fn metric_max(&mut self, key: &str, value: f64) {
        let slot = self.metrics.entry(key.to_string()).or_insert(0.0);
        if value > *slot {
            *slot = value;
        }
    }

    /// Makes the report independent of evaluation order.
    pub fn finalize(&mut self) {
        self.violations.sort_by(|a, b| a.case.cmp(&b.case));
    }

    pub fn merge(&mut self, other: PropertyReport) {
        self.cases_run += other.cases_run;
        self.violations.extend(other.violations);
        self.untestable_limits += other.untestable_limits;
        for (k, v) in other.metrics {
            self.metric_max(&k, v);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{status} {}: {} cases, {} violations, seed {}",
            self.suite,
            self.cases_run,
            self.violations.len(),
            self.seed
        );
        if self.untestable_limits > 0 {
            let _ = writeln!(out, "  untestable limits skipped: {}", self.untestable_limits);
        }
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "  {k}: {v:.3e}");
        }
        if !self.violations.is_empty() {
            let width = self.violations.iter().map(|v| v.case.len()).max().unwrap_or(4).max(4);
            let _ = writeln!(out, "  {:<width$}  {:>14}  {:>14}  {:>11}", "case", "observed", "expected", "slack");
            for v in &self.violations {
                let _ = writeln!(
                    out,
                    "  {:<width$}  {:>14.9}  {:>14.9}  {:>11.3e}",
                    v.case, v.observed, v.expected, v.slack
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_and_sorts() {
        let mut r = PropertyReport::new("demo", 3, serde_json::json!({"tol": 1e-9}));
        r.expect_eq("z", 1.0, 1.0, 1e-9);
        r.expect_eq("b", 1.0, 2.0, 1e-9);
        r.expect_le("a", 3.0, 2.0, 1e-9);
        r.finalize();
        assert_eq!(r.cases_run, 3);
        let cases: Vec<_> = r.violations.iter().map(|v| v.case.as_str()).collect();
        assert_eq!(cases, ["a", "b"]);
        assert!((r.violations[0].slack + 1.0).abs() < 1e-12);
        assert!(r.to_table().starts_with("FAIL demo"));
        assert_eq!(r.to_json(), r.clone().to_json());
    }
}
