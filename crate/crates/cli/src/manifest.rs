use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// One record per invocation: what ran, on which files, and what came out.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub inputs: BTreeMap<String, String>,
    pub params: Value,
    pub duration_s: f64,
    pub passed: bool,
    pub result: Value,
}

pub struct ManifestBuilder {
    subcommand: String,
    inputs: BTreeMap<String, String>,
    params: Value,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str, params: Value) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            inputs: BTreeMap::new(),
            params,
            started: Instant::now(),
        }
    }

    pub fn input(mut self, name: &str, path: &Path) -> Self {
        self.inputs.insert(name.to_string(), path.display().to_string());
        self
    }

    pub fn finish(self, passed: bool, result: Value) -> RunManifest {
        RunManifest {
            tool: "netcontract",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            inputs: self.inputs,
            params: self.params,
            duration_s: self.started.elapsed().as_secs_f64(),
            passed,
            result,
        }
    }
}

impl RunManifest {
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        match path {
            Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

/// Pretty JSON with a trailing newline, used for every result artifact.
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
