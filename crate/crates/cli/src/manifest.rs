use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Run-level record written next to every set of artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical JSON form of `inputs`.
    pub config_hash: String,
    pub inputs: BTreeMap<String, Value>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub results: BTreeMap<String, Value>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: BTreeMap<String, Value>) -> Self {
        RunManifest {
            command: command.into(),
            config_hash: config_hash(&inputs),
            inputs,
            outputs: Vec::new(),
            wall_time_s: 0.0,
            results: BTreeMap::new(),
        }
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), to_value(value));
    }

    pub fn write(&mut self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join("manifest.json");
        self.outputs.push(path.display().to_string());
        let text = serde_json::to_string_pretty(self).expect("manifest is serializable");
        write_file(&path, text.as_bytes())?;
        Ok(path)
    }
}

pub fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("value is serializable")
}

/// Deterministic digest of a resolved parameter map. `serde_json` objects
/// keep keys sorted, so equal maps give equal text.
pub fn config_hash(inputs: &BTreeMap<String, Value>) -> String {
    let canonical = serde_json::to_string(inputs).expect("inputs are serializable");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Fixed float format: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
