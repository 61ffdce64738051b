//! Report assembly: one structured record per check, a machine-readable JSON
//! document, and an aligned table for the terminal. Reports carry no
//! timestamps or host details, so identical configs produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::Config;

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub name: String,
    /// Refinement level the value was measured at; 0 for level-independent
    /// (algebraic or build-time) checks.
    pub level: usize,
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Record {
    /// A check that passes iff `value <= tolerance`.
    pub fn bounded(name: &str, level: usize, metric: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            level,
            metric: metric.to_string(),
            value,
            tolerance,
            pass: value.is_finite() && value <= tolerance,
        }
    }

    /// A check with an externally decided verdict (value kept for context).
    pub fn verdict(name: &str, level: usize, metric: &str, value: f64, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            level,
            metric: metric.to_string(),
            value,
            tolerance: f64::NAN,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub package: &'static str,
    pub version: &'static str,
    pub scalar: &'static str,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            scalar: "f64",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub environment: Environment,
    pub config: Config,
    pub records: Vec<Record>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, config: &Config, records: Vec<Record>) -> Self {
        let pass = records.iter().all(|r| r.pass);
        Self {
            command: command.to_string(),
            environment: Environment::default(),
            config: config.clone(),
            records,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned table for desk reading.
    pub fn to_table(&self) -> String {
        let name_w = self
            .records
            .iter()
            .map(|r| r.name.len())
            .chain(["check".len()])
            .max()
            .unwrap();
        let metric_w = self
            .records
            .iter()
            .map(|r| r.metric.len())
            .chain(["metric".len()])
            .max()
            .unwrap();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<name_w$}  {:>5}  {:<metric_w$}  {:>12}  {:>12}  {}",
            "check", "level", "metric", "value", "tolerance", "result"
        );
        for r in &self.records {
            let tol = if r.tolerance.is_nan() {
                "-".to_string()
            } else {
                format!("{:.3e}", r.tolerance)
            };
            let _ = writeln!(
                s,
                "{:<name_w$}  {:>5}  {:<metric_w$}  {:>12.5e}  {:>12}  {}",
                r.name,
                r.level,
                r.metric,
                r.value,
                tol,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            s,
            "{}: {} ({} checks)",
            self.command,
            if self.pass { "pass" } else { "FAIL" },
            self.records.len()
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_and_aggregate() {
        let cfg = Config::default();
        let records = vec![
            Record::bounded("a", 4, "err", 1e-9, 1e-6),
            Record::bounded("b", 0, "err", 2.0, 1.0),
        ];
        let rep = Report::new("demo", &cfg, records);
        assert!(!rep.pass);
        assert!(rep.records[0].pass);
        let table = rep.to_table();
        assert!(table.contains("FAIL"));
        // identical input yields identical bytes
        let again = Report::new(
            "demo",
            &cfg,
            vec![
                Record::bounded("a", 4, "err", 1e-9, 1e-6),
                Record::bounded("b", 0, "err", 2.0, 1.0),
            ],
        );
        assert_eq!(rep.to_json(), again.to_json());
    }

    #[test]
    fn non_finite_values_fail() {
        let r = Record::bounded("a", 0, "err", f64::NAN, 1.0);
        assert!(!r.pass);
    }
}
