use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::shard::write_atomic;
use super::SimError;
use crate::construction::{CodeSpec, Family, Pattern};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;
pub use crate::construction::LAMBDA_RULE as LAMBDA_RULE_NAME;

/// Smallest modulus used when bytes are stored one per element.
pub const PAYLOAD_MIN_PRIME: u64 = 257;

/// Code parameters as they appear in manifests and scenario files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub patterns: Vec<Pattern>,
}

impl CodeParams {
    pub fn build(&self, min_prime: u64) -> Result<CodeSpec, SimError> {
        Ok(CodeSpec::build_with_min_prime(
            self.family,
            self.n,
            self.k,
            &self.patterns,
            min_prime,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataMode {
    /// Real bytes, one per element.
    Payload,
    /// Seeded random symbols.
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    #[serde(flatten)]
    pub code: CodeParams,
    pub prime: u64,
    pub lambda_rule: String,
    pub ell: usize,
    pub stripes: usize,
    pub mode: DataMode,
    pub payload_len: u64,
    pub padding: u64,
    /// sha256 of the payload bytes, or of the data symbols (u64 LE) in
    /// synthetic mode.
    pub content_digest: String,
    pub seed: Option<u64>,
    /// Per node, sha256 over its shard files in stripe order.
    pub node_digests: Vec<String>,
    pub failed: Vec<usize>,
}

impl Manifest {
    pub fn load(root: &Path) -> Result<Self, SimError> {
        let path = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| SimError::io(&path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.format_version != MANIFEST_VERSION {
            return Err(SimError::Manifest(format!("unsupported format version {}", m.format_version)));
        }
        Ok(m)
    }

    pub fn store(&self, root: &Path) -> Result<(), SimError> {
        let path = root.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        write_atomic(&path, text.as_bytes()).map_err(|e| SimError::io(&path, e))
    }
}
