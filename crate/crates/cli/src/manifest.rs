//! Run manifests: enough to re-execute a run and check its inputs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Command;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub command: Command,
    pub seed: u64,
    pub version: String,
    /// sha256 of every input file, keyed by the path as given.
    pub input_digests: BTreeMap<String, String>,
    /// sha256 of every output file written under `--out`.
    pub output_digests: BTreeMap<String, String>,
    pub log_base: String,
    pub unix_time: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}
