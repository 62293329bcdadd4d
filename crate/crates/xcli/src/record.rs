use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

/// Rounds to 12 significant digits so documents stay stable across platforms.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
}

/// Monte Carlo acceptance count against an exact probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Empirical {
    pub name: String,
    pub trials: u64,
    pub accepted: u64,
    pub rate: f64,
    pub expected: f64,
    /// Binomial standard deviation of the rate, `√(p(1−p)/T)`.
    pub sigma: f64,
    /// `expected ± (4σ + 1/T)`, clipped to `[0, 1]`.
    pub low: f64,
    pub high: f64,
    pub consistent: bool,
}

impl Empirical {
    pub fn new(name: &str, trials: u64, accepted: u64, expected: f64) -> Self {
        let t = trials.max(1) as f64;
        let rate = accepted as f64 / t;
        let p = expected.clamp(0.0, 1.0);
        let sigma = (p * (1.0 - p) / t).sqrt();
        let half = 4.0 * sigma + 1.0 / t;
        let low = (p - half).max(0.0);
        let high = (p + half).min(1.0);
        Self {
            name: name.to_string(),
            trials,
            accepted,
            rate: round12(rate),
            expected: round12(expected),
            sigma: round12(sigma),
            low: round12(low),
            high: round12(high),
            consistent: low <= rate && rate <= high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    /// `<=`, `>=` or `~=` (within `tolerance`).
    pub relation: &'static str,
    pub bound: f64,
    pub tolerance: f64,
}

/// One row of the optional per-trial CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRow {
    pub series: String,
    pub trial: u64,
    pub accepted: bool,
    pub steps: u64,
}

/// Result document. Field order here is the serialized order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub seed: u64,
    pub trials: u64,
    pub params: BTreeMap<String, String>,
    pub values: Vec<Quantity>,
    pub empirical: Vec<Empirical>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

impl ExperimentRecord {
    pub(crate) fn new(experiment: &str, seed: u64, trials: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed,
            trials,
            params: BTreeMap::new(),
            values: Vec::new(),
            empirical: Vec::new(),
            assertions: Vec::new(),
            passed: true,
            rows: Vec::new(),
        }
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|q| q.name == name).map(|q| q.value)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn failed_assertions(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record(["series", "trial", "accepted", "steps"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub(crate) fn push_value(&mut self, name: &str, value: f64) {
        self.values.push(Quantity {
            name: name.to_string(),
            value: round12(value),
        });
    }

    fn push_assertion(
        &mut self,
        name: &str,
        passed: bool,
        observed: f64,
        relation: &'static str,
        bound: f64,
        tolerance: f64,
    ) {
        self.passed &= passed;
        self.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            observed: round12(observed),
            relation,
            bound: round12(bound),
            tolerance,
        });
    }

    pub(crate) fn check_le(&mut self, name: &str, observed: f64, bound: f64, tolerance: f64) {
        self.push_assertion(name, observed <= bound + tolerance, observed, "<=", bound, tolerance);
    }

    pub(crate) fn check_ge(&mut self, name: &str, observed: f64, bound: f64, tolerance: f64) {
        self.push_assertion(name, observed + tolerance >= bound, observed, ">=", bound, tolerance);
    }

    pub(crate) fn check_close(&mut self, name: &str, observed: f64, expected: f64, tolerance: f64) {
        self.push_assertion(
            name,
            (observed - expected).abs() <= tolerance,
            observed,
            "~=",
            expected,
            tolerance,
        );
    }

    /// Records `passes` out of `total` as an assertion that all passed.
    pub(crate) fn check_all(&mut self, name: &str, passes: usize, total: usize) {
        self.push_assertion(name, passes == total, passes as f64, "~=", total as f64, 0.0);
    }

    pub(crate) fn push_empirical(&mut self, e: Empirical) {
        self.passed &= e.consistent;
        self.empirical.push(e);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(0.123456789012345), 0.123456789012);
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(-2.5e-20), -2.5e-20);
        assert_eq!(round12(0.0), 0.0);
    }

    #[test]
    fn empirical_interval() {
        let e = Empirical::new("x", 10_000, 5_000, 0.5);
        assert!(e.consistent);
        assert!((e.sigma - 0.005).abs() < 1e-15);
        let e = Empirical::new("x", 10_000, 6_000, 0.5);
        assert!(!e.consistent);
        let e = Empirical::new("x", 100, 0, 0.0);
        assert!(e.consistent);
    }
}
