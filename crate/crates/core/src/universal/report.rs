use serde::Serialize;
use serde_json::Value;

pub const FALSIFICATION_NOTE: &str =
    "falsification harness: finitely many enumerated instances can refute a universal property, never establish it";

/// One named condition with its sample count and the first violations.
#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub name: String,
    pub cases: usize,
    pub pass: bool,
    pub violations: Vec<String>,
}

impl Condition {
    pub fn new(name: impl Into<String>) -> Self {
        Condition { name: name.into(), cases: 0, pass: true, violations: Vec::new() }
    }

    /// Records one case; only the first few violations are kept.
    pub fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.pass = false;
            if self.violations.len() < 5 {
                self.violations.push(what());
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub check: String,
    pub subject: String,
    pub conditions: Vec<Condition>,
    pub pass: bool,
    pub note: String,
}

impl Report {
    pub fn new(check: &str, subject: impl Into<String>, conditions: Vec<Condition>) -> Self {
        let pass = conditions.iter().all(|c| c.pass);
        Report { check: check.into(), subject: subject.into(), conditions, pass, note: FALSIFICATION_NOTE.into() }
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<&Condition> {
        self.conditions.iter().find(|c| !c.pass)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}
