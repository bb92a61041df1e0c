//! Frozen envelope constants.
//!
//! The paper's theorems assert existence of unnumbered constants; the
//! acceptance suite measures them once under fixed seeds and freezes the
//! result. Later runs flag any regression beyond 5%.

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Drift allowance against the frozen values.
pub const DRIFT_TOLERANCE: f64 = 0.05;

/// The envelope constants shipped with the repository (frozen on first
/// run of `--freeze-baseline` with seed 42).
pub const BUILTIN: &str = include_str!("../baselines/envelopes.json");

#[derive(Debug, Clone, Default)]
pub struct Baseline {
    values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct DriftEntry {
    pub key: String,
    pub frozen: f64,
    pub measured: f64,
    pub drift: f64,
    pub regression: bool,
}

impl Baseline {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("builtin baseline must parse")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| format!("baseline parse error: {e}"))?;
        let map = value
            .as_object()
            .ok_or_else(|| "baseline must be a JSON object".to_string())?;
        let mut values = BTreeMap::new();
        for (k, v) in map {
            let num = v
                .as_f64()
                .ok_or_else(|| format!("baseline entry {k} is not a number"))?;
            values.insert(k.clone(), num);
        }
        Ok(Baseline { values })
    }

    pub fn empty() -> Self {
        Baseline::default()
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let mut first = true;
        for (k, v) in &self.values {
            if !first {
                out.push_str(",\n");
            }
            first = false;
            let _ = write!(out, "  \"{k}\": {v}");
        }
        out.push_str("\n}\n");
        out
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }

    /// Compare a measured envelope against the frozen value. A larger
    /// measurement beyond the drift tolerance is a regression; shrinkage
    /// is reported but tolerated (the envelope still holds).
    pub fn compare(&self, key: &str, measured: f64) -> Option<DriftEntry> {
        let frozen = self.get(key)?;
        let drift = (measured - frozen) / frozen.abs().max(1e-300);
        Some(DriftEntry {
            key: key.to_string(),
            frozen,
            measured,
            drift,
            regression: drift > DRIFT_TOLERANCE,
        })
    }
}
