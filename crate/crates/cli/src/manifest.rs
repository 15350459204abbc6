use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::failure::Failure;

/// Record of one command's outputs, written after everything else.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: String,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<String>,
    pub version: String,
}

/// Collects files written into one output directory.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Outputs { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| Failure::io(&path, e))?;
        self.written.push(path.display().to_string());
        Ok(path)
    }

    pub fn finish(mut self, seeds: Vec<u64>) -> Result<PathBuf, Failure> {
        let manifest = RunManifest {
            command_line: std::env::args().collect::<Vec<_>>().join(" "),
            seeds,
            artifacts: std::mem::take(&mut self.written),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.path("manifest.json");
        fs::write(&path, text + "\n").map_err(|e| Failure::io(&path, e))?;
        Ok(path)
    }
}
