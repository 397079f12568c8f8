//! Run manifests: enough metadata to verify a reproduction byte-for-byte.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub config_digest: String,
    pub master_seed: u64,
    pub timestamp_unix_s: u64,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(experiment: String, config_digest: String, master_seed: u64) -> Self {
        RunManifest {
            tool: "zne-lab",
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            config_digest,
            master_seed,
            timestamp_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, name: &str, contents: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(contents);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.outputs.push(OutputFile {
            file: name.to_string(),
            bytes: contents.len(),
            sha256: hex,
        });
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serialises");
        std::fs::write(dir.join("manifest.json"), json + "\n")
    }
}
