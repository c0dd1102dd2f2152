//! Run reports: named pass/fail checks for one instance.
//!
//! Timings are kept apart from the payload so identical inputs give
//! byte-identical reports.

use std::time::Instant;

use serde::Serialize;

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: serde_json::Value,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct RunReport {
    pub instance: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl RunReport {
    pub fn new(instance: impl Into<String>, seed: u64) -> Self {
        Self {
            instance: instance.into(),
            seed,
            checks: Vec::new(),
            timings: Vec::new(),
        }
    }

    /// Records a check. Panics if a check of that name was already recorded.
    pub fn check(&mut self, name: &str, pass: bool, detail: serde_json::Value) {
        assert!(
            self.checks.iter().all(|c| c.name != name),
            "check {name} recorded twice"
        );
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Runs `f` and records its wall time under `phase`.
    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings
            .push((phase.to_string(), start.elapsed().as_secs_f64() * 1e3));
        out
    }

    /// One `PASS name` / `FAIL name: detail` line per check.
    pub fn lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            if c.pass || c.detail.is_null() {
                out.push_str(&format!("{verdict} {}\n", c.name));
            } else {
                out.push_str(&format!("{verdict} {}: {}\n", c.name, c.detail));
            }
        }
        out
    }

    pub fn timing_lines(&self) -> String {
        self.timings
            .iter()
            .map(|(p, ms)| format!("{p}: {ms:.3} ms\n"))
            .collect()
    }
}
