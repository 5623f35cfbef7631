use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: Vec<String>,
    /// sha256 of every input file, keyed by the path as given
    pub input_digests: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub tool_version: String,
    pub wall_time_s: f64,
}

pub struct Recorder {
    started: Instant,
    pub manifest: RunManifest,
}

impl Recorder {
    pub fn new(command: String, flags: Vec<String>, workers: usize) -> Self {
        Recorder {
            started: Instant::now(),
            manifest: RunManifest {
                command,
                flags,
                input_digests: BTreeMap::new(),
                seed: None,
                workers,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_s: 0.0,
            },
        }
    }

    /// Read an input file and record its digest.
    pub fn read(&mut self, path: &Path) -> std::io::Result<Vec<u8>> {
        let bytes = std::fs::read(path)?;
        self.manifest.input_digests.insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    pub fn finish(mut self) -> RunManifest {
        self.manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        self.manifest
    }
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: &'static str,
    pub manifest: &'a RunManifest,
    pub result: T,
}
