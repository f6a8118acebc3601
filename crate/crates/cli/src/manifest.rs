//! Run manifests: enough to reproduce any output of the tool.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = concat!("curvecross ", env!("CARGO_PKG_VERSION"));

/// Degrees covered by a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Degrees {
    Single(usize),
    Range { from: usize, to: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct WallClock {
    pub started_unix_ms: u128,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(rename = "N")]
    pub degrees: Degrees,
    pub r: Option<u32>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    /// Worker threads; never affects results.
    pub workers: usize,
    pub config: Value,
    /// SHA-256 of the compact JSON of `config`.
    pub config_hash: String,
    pub tool_version: String,
    pub wall_clock: WallClock,
}

pub fn config_hash(config: &Value) -> String {
    // serde_json maps are sorted, so this encoding is canonical
    let bytes = serde_json::to_vec(config).expect("JSON values always encode");
    hex::encode(Sha256::digest(&bytes))
}

/// Collects the fields of a manifest while a command runs.
pub struct ManifestBuilder {
    command: &'static str,
    degrees: Degrees,
    r: Option<u32>,
    seed: Option<u64>,
    samples: Option<u64>,
    workers: usize,
    config: Value,
    started: SystemTime,
    clock: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &'static str, degrees: Degrees) -> Self {
        ManifestBuilder {
            command,
            degrees,
            r: None,
            seed: None,
            samples: None,
            workers: 1,
            config: Value::Null,
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn r(mut self, r: u32) -> Self {
        self.r = Some(r);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn samples(mut self, samples: u64) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn config<T: Serialize>(mut self, config: &T) -> Self {
        self.config = serde_json::to_value(config).expect("configs serialize to JSON");
        self
    }

    pub fn finish(&self) -> RunManifest {
        RunManifest {
            command: self.command.to_string(),
            degrees: self.degrees,
            r: self.r,
            seed: self.seed,
            samples: self.samples,
            workers: self.workers,
            config_hash: config_hash(&self.config),
            config: self.config.clone(),
            tool_version: TOOL_VERSION.to_string(),
            wall_clock: WallClock {
                started_unix_ms: self
                    .started
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_millis()),
                elapsed_seconds: self.clock.elapsed().as_secs_f64(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b = json!({"a": [1, 2], "b": 1});
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&json!({"a": [1, 2], "b": 2})));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn degrees_serialize_compactly() {
        assert_eq!(serde_json::to_value(Degrees::Single(3)).unwrap(), json!(3));
        assert_eq!(
            serde_json::to_value(Degrees::Range { from: 1, to: 3 }).unwrap(),
            json!({"from": 1, "to": 3})
        );
    }
}
