//! Run manifests: what was run, on which inputs, with which parameters.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const REPORT_HEADER: &str = "cubic-bm report v1";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Input path → SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    /// Wall-clock milliseconds; recorded only on request so reports stay byte-identical.
    pub timing_ms: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.into(),
            inputs: BTreeMap::new(),
            params: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").into(),
            timing_ms: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    /// Reads an input file, recording its digest.
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        self.inputs.insert(path.display().to_string(), format!("{digest:x}"));
        String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}
