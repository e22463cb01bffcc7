//! Versioned JSON reports.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const SCHEMA: u32 = 1;
pub const RESOLUTION_NOTE: &str = "all checks hold at sampled resolution only";

#[derive(Clone, Debug, Serialize)]
pub struct Expectation {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    VerificationFailed,
    Error,
}

#[derive(Debug, Serialize)]
pub struct Conventions {
    pub representation: &'static str,
    pub resolution: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub command: String,
    pub config: RunConfig,
    pub config_hash: String,
    pub conventions: Conventions,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub expectations: Vec<Expectation>,
    pub results: Value,
}

/// First 16 hex digits of the SHA-256 of the canonical config JSON.
pub fn config_hash(cfg: &RunConfig) -> String {
    let text = serde_json::to_string(cfg).expect("config serializes");
    Sha256::digest(text.as_bytes())[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Accumulates expectations and command results.
#[derive(Debug, Default)]
pub struct Findings {
    pub expectations: Vec<Expectation>,
    pub results: serde_json::Map<String, Value>,
}

impl Findings {
    pub fn expect(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.expectations.push(Expectation {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or_else(|e| Value::String(format!("unserializable: {e}")));
        self.results.insert(key.to_string(), v);
    }

    pub fn all_passed(&self) -> bool {
        self.expectations.iter().all(|e| e.passed)
    }
}

impl Report {
    pub fn new(cfg: &RunConfig, findings: Findings, error: Option<String>) -> Report {
        let status = if error.is_some() {
            Status::Error
        } else if findings.all_passed() {
            Status::Ok
        } else {
            Status::VerificationFailed
        };
        Report {
            schema: SCHEMA,
            tool: format!("projmetric {}", env!("CARGO_PKG_VERSION")),
            command: cfg.command.as_ref().map(|c| c.name()).unwrap_or("none").to_string(),
            config: cfg.clone(),
            config_hash: config_hash(cfg),
            conventions: Conventions {
                representation: projmetric::representation::ROW_CONVENTION,
                resolution: RESOLUTION_NOTE,
            },
            status,
            error,
            expectations: findings.expectations,
            results: Value::Object(findings.results),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
