//! Layering of config-file tables under command-line flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// Parsed `--config` file (empty when none was given).
#[derive(Debug, Default)]
pub struct FileConfig {
    root: toml::Table,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let root: toml::Table = text
            .parse()
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(FileConfig { root })
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        match self.root.get("seed") {
            None => Ok(None),
            Some(toml::Value::Integer(n)) if *n >= 0 => Ok(Some(*n as u64)),
            Some(other) => bail!("config `seed` must be a non-negative integer, got {other}"),
        }
    }

    fn section(&self, path: &[&str]) -> Option<&toml::Value> {
        let mut value = self.root.get(path[0])?;
        for key in &path[1..] {
            value = value.get(key)?;
        }
        Some(value)
    }

    /// Flags that were given override the `[a.b]` table, which overrides
    /// built-in defaults (applied later by the command).
    pub fn layer<T: Serialize + DeserializeOwned>(&self, path: &[&str], flags: &T) -> Result<T> {
        let mut merged = match self.section(path) {
            Some(section) => serde_json::to_value(section)?,
            None => Value::Object(Default::default()),
        };
        let Value::Object(base) = &mut merged else {
            bail!("config [{}] must be a table", path.join("."));
        };
        if let Value::Object(given) = serde_json::to_value(flags)? {
            for (k, v) in given {
                if !v.is_null() {
                    base.insert(k, v);
                }
            }
        }
        serde_json::from_value(merged).with_context(|| format!("invalid config [{}]", path.join(".")))
    }
}
