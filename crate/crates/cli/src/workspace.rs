//! Named bindings and run configuration, persisted as one JSON document.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gfcalc_core::{GfError, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Exponent `p` of the gauge `rho = eps^p`, as a rational string.
    pub gauge: String,
    pub level: u32,
    pub alpha_cap: u32,
    pub d_cap: u32,
    /// Mollifier order for regularizations.
    pub p: u32,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { gauge: "1".into(), level: 4, alpha_cap: 4, d_cap: 5, p: 8, seed: 0 }
    }
}

/// Bindings map a unique name to the JSON form of a domain object.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Workspace {
    pub config: Config,
    pub bindings: BTreeMap<String, Value>,
}

impl Workspace {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Workspace::default());
        }
        let text = fs::read_to_string(path).map_err(|e| GfError::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| GfError::Parse(format!("workspace {}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| GfError::Parse(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|e| GfError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn get(&self, name: &str) -> Result<&Value> {
        self.bindings.get(name).ok_or_else(|| GfError::Parse(format!("unbound name @{name}")))
    }

    pub fn bind(&mut self, name: &str, v: Value) -> Result<()> {
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(GfError::Parse(format!("invalid binding name {name:?}")));
        }
        self.bindings.insert(name.to_string(), v);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trips_through_json() {
        let mut w = Workspace::default();
        w.config.level = 5;
        w.bind("t", json!({"order": [1], "rep": "x"})).unwrap();
        let back: Workspace = serde_json::from_value(serde_json::to_value(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn names_are_checked() {
        let mut w = Workspace::default();
        assert!(w.bind("a b", json!(1)).is_err());
        assert!(w.get("missing").is_err());
    }

    #[test]
    fn missing_fields_take_defaults() {
        let w: Workspace = serde_json::from_str(r#"{"config": {"level": 6}}"#).unwrap();
        assert_eq!(w.config.level, 6);
        assert_eq!(w.config.p, 8);
        assert!(w.bindings.is_empty());
    }
}
