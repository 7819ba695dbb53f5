use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use bcdist::RawScenario;
use serde::Serialize;

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or files; exit code 2.
    Input { kind: String, message: String },
    /// A verification or invariant check failed; exit code 1.
    Verification(String),
}

impl Failure {
    pub fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure::Input {
            kind: kind.to_string(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            Failure::Input { kind, message } => (kind.as_str(), message.as_str()),
            Failure::Verification(m) => ("VerificationFailed", m.as_str()),
        };
        serde_json::json!({ "error": kind, "message": message }).to_string()
    }
}

impl From<bcdist::Error> for Failure {
    fn from(e: bcdist::Error) -> Self {
        Failure::input(e.kind(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input("Io", e.to_string())
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub scenario: Option<RawScenario>,
    pub parameters: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, scenario: Option<RawScenario>) -> Self {
        RunManifest {
            command: command.to_string(),
            scenario,
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::input("Serialize", e.to_string()))
}

/// Writes `contents` to `dir/name` and records the path in the manifest.
pub fn write_output(dir: &Path, name: &str, contents: &[u8], manifest: &mut RunManifest) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    manifest.outputs.push(path.display().to_string());
    Ok(path)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let mut text = to_json(manifest)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}
