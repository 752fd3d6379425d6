use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    /// `n` for perturbation sequences, `t` for trajectories, a pair index otherwise.
    pub index: f64,
    pub quantity: String,
    pub bound: Option<f64>,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub name: String,
    pub slack: f64,
    pub passed: bool,
    pub constants: BTreeMap<String, f64>,
    pub rows: Vec<ProbeRow>,
    pub notes: Vec<String>,
}

impl ProbeReport {
    pub fn new(name: &str, slack: f64) -> Self {
        Self {
            name: name.to_string(),
            slack,
            passed: true,
            constants: BTreeMap::new(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn constant(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Records a row without a bound.
    pub fn observe(&mut self, index: f64, quantity: &str, observed: f64) {
        self.rows.push(ProbeRow {
            index,
            quantity: quantity.to_string(),
            bound: None,
            observed,
        });
    }

    /// Records a row and fails the report unless `observed ≤ bound (1 + slack)`.
    pub fn check(&mut self, index: f64, quantity: &str, bound: f64, observed: f64) -> bool {
        let ok = observed <= bound * (1.0 + self.slack);
        if !ok {
            if self.passed {
                self.note(format!(
                    "first violation: {quantity} = {observed:e} > {bound:e} (1 + {}) at index {index}",
                    self.slack
                ));
            }
            self.passed = false;
        }
        self.rows.push(ProbeRow {
            index,
            quantity: quantity.to_string(),
            bound: Some(bound),
            observed,
        });
        ok
    }

    /// Like [`check`](Self::check) with the slack already folded into `bound`.
    pub fn check_abs(&mut self, index: f64, quantity: &str, bound: f64, observed: f64) -> bool {
        let ok = observed <= bound;
        if !ok {
            if self.passed {
                self.note(format!(
                    "first violation: {quantity} = {observed:e} > {bound:e} at index {index}"
                ));
            }
            self.passed = false;
        }
        self.rows.push(ProbeRow {
            index,
            quantity: quantity.to_string(),
            bound: Some(bound),
            observed,
        });
        ok
    }

    /// Fails the report with a note.
    pub fn fail(&mut self, reason: impl Into<String>) {
        self.passed = false;
        self.note(reason);
    }

    /// Rows of one quantity, in insertion order.
    pub fn series(&self, quantity: &str) -> Vec<&ProbeRow> {
        self.rows.iter().filter(|r| r.quantity == quantity).collect()
    }

    /// Stores `max_ratio_<q>`, the largest `observed / bound` of every bounded
    /// quantity. Values near 1 mark a sharp constant.
    pub fn record_sharpness(&mut self) {
        let mut worst: BTreeMap<String, f64> = BTreeMap::new();
        for r in &self.rows {
            if let Some(b) = r.bound.filter(|b| *b > 0.0) {
                let e = worst.entry(r.quantity.clone()).or_insert(0.0);
                *e = e.max(r.observed / b);
            }
        }
        for (q, v) in worst {
            self.constant(&format!("max_ratio_{q}"), v);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// `index,quantity,bound,observed`; an empty bound means none applies.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,quantity,bound,observed\n");
        for r in &self.rows {
            let bound = r.bound.map(|b| format!("{b:.16e}")).unwrap_or_default();
            let _ = writeln!(out, "{:.16e},{},{},{:.16e}", r.index, r.quantity, bound, r.observed);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharpness_takes_the_worst_ratio() {
        let mut r = ProbeReport::new("x", 0.1);
        r.check(1.0, "a", 2.0, 1.0);
        r.check(2.0, "a", 1.0, 0.75);
        r.check(3.0, "b", 0.0, 0.0);
        r.observe(4.0, "c", 9.0);
        r.record_sharpness();
        assert_eq!(r.constants["max_ratio_a"], 0.75);
        assert!(!r.constants.contains_key("max_ratio_b"));
        assert!(!r.constants.contains_key("max_ratio_c"));
    }

    #[test]
    fn check_applies_slack() {
        let mut r = ProbeReport::new("x", 0.1);
        assert!(r.check(1.0, "a", 1.0, 1.05));
        assert!(r.passed);
        assert!(!r.check(2.0, "a", 1.0, 1.2));
        assert!(!r.passed);
        assert_eq!(r.series("a").len(), 2);
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn csv_and_json() {
        let mut r = ProbeReport::new("x", 0.1);
        r.constant("L", 2.0);
        r.observe(0.0, "d", 0.5);
        r.check(1.0, "a", 1.0, 0.5);
        let csv = r.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[1], "0.0000000000000000e0,d,,5.0000000000000000e-1");
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["constants"]["L"], 2.0);
        assert_eq!(v["rows"][0]["bound"], serde_json::Value::Null);
    }
}
