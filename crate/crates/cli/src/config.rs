//! Flat `key = value` experiment configuration with `[section]` headers.
//! No nesting; every value is a scalar or a comma-separated list.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration: section -> key -> (value, source line).
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
    canonical: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
        let mut current = String::from("default");
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(ConfigError {
                    line: line_no,
                    message: "unterminated section header".into(),
                })?;
                current = name.trim().to_string();
                if current.is_empty() {
                    return Err(ConfigError {
                        line: line_no,
                        message: "empty section name".into(),
                    });
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError {
                    line: line_no,
                    message: "empty key".into(),
                });
            }
            sections
                .entry(current.clone())
                .or_default()
                .insert(key.to_string(), (value.trim().to_string(), line_no));
        }
        let mut canonical = String::new();
        for (section, keys) in &sections {
            canonical.push_str(&format!("[{section}]\n"));
            for (k, (v, _)) in keys {
                canonical.push_str(&format!("{k} = {v}\n"));
            }
        }
        Ok(RunConfig {
            sections,
            canonical,
        })
    }

    /// Canonical text used for the manifest hash.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    fn raw(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    pub fn get_f64(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.raw(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|e| ConfigError {
                line: *line,
                message: format!("field {section}.{key}: bad number `{v}` ({e})"),
            }),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.raw(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|e| ConfigError {
                line: *line,
                message: format!("field {section}.{key}: bad integer `{v}` ({e})"),
            }),
        }
    }

    pub fn get_f64_list(
        &self,
        section: &str,
        key: &str,
        default: &[f64],
    ) -> Result<Vec<f64>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(default.to_vec()),
            Some((v, line)) => v
                .split(',')
                .map(|part| {
                    part.trim().parse().map_err(|e| ConfigError {
                        line: *line,
                        message: format!("field {section}.{key}: bad number `{part}` ({e})"),
                    })
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let text = "# comment\n[grid]\npoints = 128\nperiod = 6.28\n\n[maxreg]\nhorizons = 1, 4, 16\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.get_usize("grid", "points", 0).unwrap(), 128);
        assert_eq!(cfg.get_f64("grid", "period", 0.0).unwrap(), 6.28);
        assert_eq!(cfg.get_f64("grid", "missing", 7.0).unwrap(), 7.0);
        assert_eq!(
            cfg.get_f64_list("maxreg", "horizons", &[]).unwrap(),
            vec![1.0, 4.0, 16.0]
        );
    }

    #[test]
    fn reports_line_numbers() {
        let err = RunConfig::parse("[grid]\npoints 128\n").unwrap_err();
        assert_eq!(err.line, 2);
        let cfg = RunConfig::parse("[grid]\npoints = abc\n").unwrap();
        let err = cfg.get_usize("grid", "points", 0).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("grid.points"));
    }

    #[test]
    fn canonical_text_is_stable() {
        let a = RunConfig::parse("[b]\nz = 1\na = 2\n[a]\nk = 3\n").unwrap();
        let b = RunConfig::parse("[a]\nk = 3\n[b]\na = 2\nz = 1\n").unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
