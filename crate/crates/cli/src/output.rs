//! Output sinks that stamp every artifact with its provenance.
//!
//! Nothing time-dependent is written, so rerunning a command with the same
//! inputs and configuration reproduces its outputs byte for byte.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
}

/// Keys naming output locations; they do not affect content and are left out
/// of the configuration hash.
const OUTPUT_KEYS: [&str; 3] = ["out", "report", "curves"];

impl Provenance {
    pub fn new<T: Serialize>(command: &str, seed: u64, params: &T) -> Result<Provenance> {
        let mut value = serde_json::to_value(params)?;
        if let Value::Object(map) = &mut value {
            map.retain(|k, v| !OUTPUT_KEYS.contains(&k.as_str()) && !v.is_null());
        }
        let canonical = serde_json::to_string(&serde_json::json!({
            "command": command,
            "seed": seed,
            "params": value,
        }))?;
        let digest = Sha256::digest(canonical.as_bytes());
        let config_hash = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Ok(Provenance {
            tool: "eumix",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config_hash,
        })
    }

    fn line(&self) -> String {
        format!(
            "{} {} {} seed={} config={}",
            self.tool, self.version, self.command, self.seed, self.config_hash
        )
    }

    /// Write a CSV artifact with a `#` comment header.
    pub fn csv(&self, target: Option<&Path>, body: impl FnOnce(&mut Vec<u8>) -> eumix::Result<()>) -> Result<()> {
        let mut buf = format!("# {}\n", self.line()).into_bytes();
        body(&mut buf)?;
        emit(target, &buf)
    }

    pub fn markdown(&self, target: Option<&Path>, body: &str) -> Result<()> {
        let text = format!("<!-- {} -->\n{body}", self.line());
        emit(target, text.as_bytes())
    }

    /// Pretty JSON with a top-level `provenance` key.
    pub fn json<T: Serialize>(&self, target: Option<&Path>, payload: &T) -> Result<()> {
        let mut value = serde_json::to_value(payload)?;
        match &mut value {
            Value::Object(map) => {
                map.insert("provenance".into(), serde_json::to_value(self)?);
            }
            other => {
                value = serde_json::json!({ "provenance": self, "data": other.take() });
            }
        }
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        emit(target, text.as_bytes())
    }

    /// JSONL whose first line is `{"provenance": ...}`.
    pub fn jsonl<T: Serialize>(&self, target: Option<&Path>, records: impl IntoIterator<Item = T>) -> Result<()> {
        let mut buf = serde_json::to_vec(&serde_json::json!({ "provenance": self }))?;
        buf.push(b'\n');
        for record in records {
            serde_json::to_writer(&mut buf, &record)?;
            buf.push(b'\n');
        }
        emit(target, &buf)
    }
}

fn emit(target: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match target {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Fail early, before any work, when an input is missing.
pub fn require_input(name: &str, path: Option<&PathBuf>) -> Result<PathBuf> {
    let path = path.with_context(|| format!("missing required input `{name}`"))?;
    anyhow::ensure!(path.exists(), "input `{name}` not found: {}", path.display());
    Ok(path.clone())
}
