//! Run directory named by a hash of the fixture and the result-relevant
//! configuration; every file written is listed with its SHA-256.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::PipelineError;

pub struct ArtifactStore {
    dir: PathBuf,
    id: String,
    hashes: BTreeMap<String, String>,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let mut f = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(io_err(path))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

impl ArtifactStore {
    pub fn create(root: &Path, key: &str) -> Result<ArtifactStore, PipelineError> {
        let id = sha256_hex(key.as_bytes())[..16].to_string();
        let dir = root.join(format!("run-{id}"));
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(ArtifactStore { dir, id, hashes: BTreeMap::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.hashes.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Opens a file for streaming; call [`ArtifactStore::record`] once it is closed.
    pub fn create_file(&self, name: &str) -> Result<File, PipelineError> {
        let path = self.path(name);
        File::create(&path).map_err(io_err(&path))
    }

    pub fn record(&mut self, name: &str) -> Result<String, PipelineError> {
        let h = sha256_file(&self.path(name))?;
        self.hashes.insert(name.to_string(), h.clone());
        Ok(h)
    }

    pub fn hashes(&self) -> &BTreeMap<String, String> {
        &self.hashes
    }

    /// Writes `manifest.json` listing every artifact hash.
    pub fn finish(&mut self) -> Result<(), PipelineError> {
        let path = self.path("manifest.json");
        let mut f = File::create(&path).map_err(io_err(&path))?;
        let text = serde_json::to_string_pretty(&self.hashes).expect("map serializes");
        f.write_all(text.as_bytes()).and_then(|_| f.write_all(b"\n")).map_err(io_err(&path))
    }
}
