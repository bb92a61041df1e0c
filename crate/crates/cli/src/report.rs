//! Report bundles: deterministic CSV bodies plus a manifest carrying the
//! config hash and wall time.

use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// A CSV artifact under construction. Comma separators, header row, dot
/// decimals, LF line endings; float formatting is shortest-roundtrip, so
/// identical runs produce byte-identical bodies.
#[derive(Debug, Clone)]
pub struct Csv {
    name: String,
    body: String,
    columns: usize,
}

impl Csv {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Csv {
            name: name.to_string(),
            body: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "column count mismatch");
        self.body.push_str(&fields.join(","));
        self.body.push('\n');
    }

    pub fn body(&self) -> &str {
        &self.body
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Collects artifacts for one experiment run and writes them with a
/// manifest.
pub struct ReportBundle {
    out_dir: Option<PathBuf>,
    experiment: String,
    config_hash: String,
    seed: u64,
    started: Instant,
    artifacts: Vec<Csv>,
    json_artifacts: Vec<(String, serde_json::Value)>,
}

impl ReportBundle {
    pub fn new(experiment: &str, out_dir: Option<&Path>, config_text: &str, seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_text.as_bytes());
        let config_hash = format!("{:x}", hasher.finalize());
        ReportBundle {
            out_dir: out_dir.map(|p| p.to_path_buf()),
            experiment: experiment.to_string(),
            config_hash,
            seed,
            started: Instant::now(),
            artifacts: Vec::new(),
            json_artifacts: Vec::new(),
        }
    }

    pub fn push_csv(&mut self, csv: Csv) {
        self.artifacts.push(csv);
    }

    pub fn push_json(&mut self, name: &str, value: serde_json::Value) {
        self.json_artifacts.push((name.to_string(), value));
    }

    /// Write all artifacts plus `manifest.json`; no-op without an output
    /// directory.
    pub fn finalize(&self) -> std::io::Result<Vec<PathBuf>> {
        let Some(dir) = &self.out_dir else {
            return Ok(Vec::new());
        };
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut names = Vec::new();
        for csv in &self.artifacts {
            let path = dir.join(format!("{}_{}.csv", self.experiment, csv.name));
            fs::write(&path, csv.body())?;
            names.push(format!("{}_{}.csv", self.experiment, csv.name));
            written.push(path);
        }
        for (name, value) in &self.json_artifacts {
            let file = format!("{}_{}.json", self.experiment, name);
            let path = dir.join(&file);
            fs::write(&path, serde_json::to_string_pretty(value)?)?;
            names.push(file);
            written.push(path);
        }
        let manifest = serde_json::json!({
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_ms": self.started.elapsed().as_millis() as u64,
            "artifacts": names,
        });
        let path = dir.join(format!("{}_manifest.json", self.experiment));
        fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        written.push(path);
        Ok(written)
    }
}
