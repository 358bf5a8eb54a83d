//! The record written next to every run's outputs.

use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config_path: String,
    /// SHA-256 of the canonical JSON form of the parsed configuration.
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_path: &Path, config_sha256: String, seed: Option<u64>, threads: Option<usize>) -> Self {
        Self {
            tool: "conelab".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_path: config_path.display().to_string(),
            config_sha256,
            seed,
            threads,
            started_at: timestamp(Utc::now()),
            finished_at: String::new(),
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self, outputs: &[PathBuf]) {
        self.finished_at = timestamp(Utc::now());
        self.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of a configuration through its canonical JSON form: object keys
/// sorted, no whitespace.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    sha256_hex(serde_json::to_string(&value).expect("value serializes").as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use conelab::lab::ExperimentConfig;

    const CFG: &str = r#"{
        "cone": {"kind": "max"},
        "spec": {"alpha": 1.5, "t_min": 1.0},
        "event": {"r": 1.0},
        "schedule": {"kind": "power", "exponent": 1.4},
        "n_grid": [100, 1000],
        "trials": 10,
        "regime": "theorem1"
    }"#;

    #[test]
    fn hash_survives_round_trip() {
        let cfg = ExperimentConfig::from_json(CFG).unwrap();
        let again = ExperimentConfig::from_json(&serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        assert_eq!(config_hash(&cfg), config_hash(&again));
        assert_eq!(config_hash(&cfg).len(), 64);
    }

    #[test]
    fn hash_ignores_key_order_and_whitespace() {
        let a = ExperimentConfig::from_json(CFG).unwrap();
        let b = ExperimentConfig::from_json(
            r#"{"regime":"theorem1","trials":10,"n_grid":[100,1000],"schedule":{"exponent":1.4,"kind":"power"},
                "event":{"r":1.0},"spec":{"t_min":1.0,"alpha":1.5},"cone":{"kind":"max"}}"#,
        )
        .unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let mut c = a.clone();
        c.seed = 9;
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
