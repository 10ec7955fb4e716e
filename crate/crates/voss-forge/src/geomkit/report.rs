//! Verification reports with a stable JSON layout.
//!
//! Serialized shape: one top-level key per check, each an object with
//! `max`, `rms`, `tol`, `pass`, plus a `provenance` block of strings.
//! Keys are emitted in sorted order so byte-identical reruns stay
//! byte-identical.

use crate::{Error, Result};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckResult {
    pub max: f64,
    pub rms: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct VerificationReport {
    pub checks: BTreeMap<String, CheckResult>,
    pub provenance: BTreeMap<String, String>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_provenance(mut self, key: &str, value: impl ToString) -> Self {
        self.provenance.insert(key.into(), value.to_string());
        self
    }

    /// Record a check; verdict is pass iff max <= tol.
    pub fn record(&mut self, name: &str, max: f64, rms: f64, tol: f64) {
        self.checks.insert(
            name.to_string(),
            CheckResult {
                max,
                rms,
                tol,
                pass: max <= tol,
            },
        );
    }

    pub fn record_result(&mut self, name: &str, r: CheckResult) {
        self.checks.insert(name.to_string(), r);
    }

    pub fn pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        for (name, c) in &self.checks {
            root.insert(
                name.clone(),
                json!({ "max": c.max, "rms": c.rms, "tol": c.tol, "pass": c.pass }),
            );
        }
        let mut prov = Map::new();
        for (k, v) in &self.provenance {
            prov.insert(k.clone(), Value::String(v.clone()));
        }
        root.insert("provenance".into(), Value::Object(prov));
        serde_json::to_string_pretty(&Value::Object(root)).expect("report serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("malformed report: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("report must be a JSON object".into()))?;
        let mut out = VerificationReport::new();
        for (k, v) in obj {
            if k == "provenance" {
                let p = v
                    .as_object()
                    .ok_or_else(|| Error::Config("provenance must be an object".into()))?;
                for (pk, pv) in p {
                    let s = pv
                        .as_str()
                        .ok_or_else(|| Error::Config("provenance values must be strings".into()))?;
                    out.provenance.insert(pk.clone(), s.to_string());
                }
                continue;
            }
            let c = v
                .as_object()
                .ok_or_else(|| Error::Config(format!("check '{k}' must be an object")))?;
            let get = |f: &str| -> Result<f64> {
                c.get(f)
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::Config(format!("check '{k}' missing field '{f}'")))
            };
            let pass = c
                .get("pass")
                .and_then(Value::as_bool)
                .ok_or_else(|| Error::Config(format!("check '{k}' missing field 'pass'")))?;
            out.checks.insert(
                k.clone(),
                CheckResult {
                    max: get("max")?,
                    rms: get("rms")?,
                    tol: get("tol")?,
                    pass,
                },
            );
        }
        Ok(out)
    }

    /// Union of checks, keeping the worst residuals on collisions.
    /// Conflicting provenance entries are an error.
    pub fn merge(&mut self, other: &VerificationReport) -> Result<()> {
        for (k, v) in &other.provenance {
            if let Some(existing) = self.provenance.get(k) {
                if existing != v {
                    return Err(Error::Config(format!(
                        "conflicting provenance for '{k}': '{existing}' vs '{v}'"
                    )));
                }
            } else {
                self.provenance.insert(k.clone(), v.clone());
            }
        }
        for (k, c) in &other.checks {
            match self.checks.get_mut(k) {
                Some(mine) => {
                    if c.max > mine.max {
                        mine.max = c.max;
                    }
                    if c.rms > mine.rms {
                        mine.rms = c.rms;
                    }
                    mine.tol = mine.tol.min(c.tol);
                    mine.pass = mine.pass && c.pass && mine.max <= mine.tol;
                }
                None => {
                    self.checks.insert(k.clone(), *c);
                }
            }
        }
        Ok(())
    }

    /// Plain-text table, one row per check.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<36} {:>12} {:>12} {:>9} {:>6}\n",
            "check", "max", "rms", "tol", "pass"
        ));
        for (name, c) in &self.checks {
            out.push_str(&format!(
                "{:<36} {:>12.4e} {:>12.4e} {:>9.1e} {:>6}\n",
                name,
                c.max,
                c.rms,
                c.tol,
                if c.pass { "ok" } else { "FAIL" }
            ));
        }
        out
    }
}
