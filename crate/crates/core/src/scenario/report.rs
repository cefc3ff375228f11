//! Run reports and their files.

use super::config::ScenarioConfig;
use crate::error::Result;
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;

/// Version tag of `report.json`.
pub const SCHEMA: &str = "swlab-report/1";

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<"`, `"<="`, `"=="`, `"in"`, or `"true"` for boolean checks.
    pub rule: &'static str,
    pub limit: Value,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub scenario: Option<ScenarioConfig>,
    pub metrics: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub artifacts: Vec<String>,
    /// Seconds; written to `timing.json`, never to `report.json`.
    #[serde(skip)]
    pub wall_clock: f64,
    #[serde(skip)]
    pub files: Vec<(String, Vec<u8>)>,
}

impl RunReport {
    pub fn new(scenario: Option<ScenarioConfig>) -> Self {
        Self {
            schema: SCHEMA,
            scenario,
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            pass: true,
            artifacts: Vec::new(),
            wall_clock: 0.0,
            files: Vec::new(),
        }
    }

    pub fn metric(&mut self, name: &str, value: impl Serialize) -> Result<()> {
        self.metrics
            .insert(name.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    fn push(&mut self, name: &str, value: f64, rule: &'static str, limit: Value, pass: bool) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            rule,
            limit,
            pass,
        });
    }

    /// `value < limit`; NaN fails.
    pub fn below(&mut self, name: &str, value: f64, limit: f64) {
        self.push(name, value, "<", limit.into(), value < limit);
    }

    /// `value <= limit`; NaN fails.
    pub fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.push(name, value, "<=", limit.into(), value <= limit);
    }

    pub fn within(&mut self, name: &str, value: f64, range: [f64; 2]) {
        let pass = value >= range[0] && value <= range[1];
        self.push(name, value, "in", serde_json::json!(range), pass);
    }

    pub fn equal(&mut self, name: &str, value: f64, want: f64) {
        self.push(name, value, "==", want.into(), value == want);
    }

    pub fn holds(&mut self, name: &str, ok: bool) {
        self.push(
            name,
            if ok { 1.0 } else { 0.0 },
            "true",
            Value::Bool(true),
            ok,
        );
    }

    pub fn file(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        let name = name.into();
        self.artifacts.push(name.clone());
        self.files.push((name, bytes));
    }

    pub fn json_file(&mut self, name: impl Into<String>, value: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.file(name, text.into_bytes());
        Ok(())
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Writes `report.json`, `timing.json` and every artifact into `dir`.
pub fn emit_report(report: &RunReport, dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, bytes) in &report.files {
        std::fs::write(dir.join(name), bytes)?;
        written.push(name.clone());
    }
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(report)? + "\n",
    )?;
    written.push("report.json".into());
    let timing = serde_json::json!({ "schema": SCHEMA, "wall_clock_seconds": report.wall_clock });
    std::fs::write(
        dir.join("timing.json"),
        serde_json::to_string_pretty(&timing)? + "\n",
    )?;
    written.push("timing.json".into());
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid_json() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&RunReport::new(None), dir.path()).unwrap();
        let v: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["metrics"], serde_json::json!({}));
        assert_eq!(v["pass"], true);
        assert!(v.get("wall_clock").is_none());
    }

    #[test]
    fn failing_check_flips_pass() {
        let mut r = RunReport::new(None);
        r.below("a", 1.0, 2.0);
        assert!(r.pass);
        r.below("b", f64::NAN, 2.0);
        assert!(!r.pass);
        assert_eq!(r.failed_checks().count(), 1);
    }
}
