use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AnalyzeOptions, ReportError};
use crate::domain::PublicSuffixTable;

/// Stand-in path for the public suffix list compiled into the binary.
pub const EMBEDDED_PSL: &str = "embedded:public_suffix_list.dat";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Reproducibility record for one `analyze` run, written before any output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub created_at: String,
    pub inputs: Vec<InputDigest>,
    pub options: AnalyzeOptions,
    pub out_dir: String,
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, ReportError> {
    let bytes = std::fs::read(path).map_err(|source| ReportError::io(path, source))?;
    Ok(sha256_bytes(&bytes))
}

impl InputDigest {
    pub fn of_file(role: &str, path: &Path) -> Result<Self, ReportError> {
        if !path.is_file() {
            return Err(ReportError::Input(format!("{role}: {} is not a readable file", path.display())));
        }
        Ok(InputDigest { role: role.into(), path: path.display().to_string(), sha256: sha256_file(path)? })
    }

    pub fn embedded_psl() -> Self {
        InputDigest {
            role: "psl".into(),
            path: EMBEDDED_PSL.into(),
            sha256: sha256_bytes(PublicSuffixTable::pinned_text().as_bytes()),
        }
    }

    fn recompute(&self) -> Result<String, ReportError> {
        if self.path == EMBEDDED_PSL {
            Ok(sha256_bytes(PublicSuffixTable::pinned_text().as_bytes()))
        } else {
            sha256_file(Path::new(&self.path))
        }
    }
}

impl RunManifest {
    pub fn new(inputs: Vec<InputDigest>, options: AnalyzeOptions, out_dir: &Path) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            inputs,
            options,
            out_dir: out_dir.display().to_string(),
        }
    }

    /// Recomputes every input hash and fails on the first mismatch.
    pub fn verify(&self) -> Result<(), ReportError> {
        for input in &self.inputs {
            let now = input.recompute()?;
            if now != input.sha256 {
                return Err(ReportError::Manifest(format!(
                    "{} ({}) changed: recorded {}, found {now}",
                    input.role, input.path, input.sha256
                )));
            }
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), ReportError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|source| ReportError::io(path, source))
    }

    pub fn read(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path).map_err(|source| ReportError::io(path, source))?;
        Ok(serde_json::from_str(&text)?)
    }
}
