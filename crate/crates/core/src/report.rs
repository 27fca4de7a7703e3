//! Estimator outputs and content hashing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex sha256 of the compact JSON encoding (object keys sorted).
pub fn hash_json(v: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(v).expect("json values always encode");
    hex::encode(Sha256::digest(&bytes))
}

/// Hash of any serializable value.
pub fn hash_of<T: Serialize>(v: &T) -> String {
    hash_json(&serde_json::to_value(v).expect("serializable"))
}

/// Value of an estimator together with its error bars and provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub name: String,
    pub value: f64,
    /// Statistical (Monte-Carlo) error, one standard deviation.
    pub stderr: f64,
    /// Truncation error from window or time-horizon changes.
    pub truncation: f64,
    /// Window start or integration time.
    pub t: f64,
    /// Window end, if the estimator uses a window `[t, t_end]`.
    pub t_end: Option<f64>,
    /// Number of classes or samples that entered.
    pub n: usize,
    pub seed: Option<u64>,
    pub inputs_hash: String,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl FunctionalReport {
    pub fn new(name: &str, value: f64) -> FunctionalReport {
        FunctionalReport {
            name: name.to_string(),
            value,
            stderr: 0.0,
            truncation: 0.0,
            t: 0.0,
            t_end: None,
            n: 0,
            seed: None,
            inputs_hash: String::new(),
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Total error band `stderr + truncation`.
    pub fn band(&self) -> f64 {
        self.stderr + self.truncation
    }

    pub fn with_window(mut self, t: f64, t_end: Option<f64>) -> Self {
        self.t = t;
        self.t_end = t_end;
        self
    }

    pub fn with_diag(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"x":1,"y":[1,2]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"y":[1,2],"x":1}"#).unwrap();
        assert_eq!(hash_json(&a), hash_json(&b));
        assert_eq!(hash_json(&a).len(), 64);
    }

    #[test]
    fn report_round_trips() {
        let r = FunctionalReport::new("psi", 0.25).with_window(9.0, Some(10.0)).with_diag("drift", 1e-3).note("ok");
        let s = serde_json::to_string(&r).unwrap();
        let back: FunctionalReport = serde_json::from_str(&s).unwrap();
        assert_eq!(r, back);
        assert!((r.band() - 0.0).abs() < 1e-15);
    }
}
