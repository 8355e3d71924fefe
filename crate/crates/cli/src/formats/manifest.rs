//! Artifact bookkeeping. Every file an experiment writes goes through
//! [`Artifacts`], and the manifest lists each with its SHA-256.

use std::path::{Path, PathBuf};

use mlcs_core::sampling::SamplingMap;
use mlcs_core::solvers::RecoveryResult;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::array::{write_array, ArrayData, ArrayMeta};
use super::image::{save_image, GrayImage};
use super::mask::write_mask;
use super::table::write_csv;
use crate::error::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Outcome of one solver call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverFlag {
    pub stage: String,
    pub converged: bool,
    pub iterations: usize,
    pub residual: Option<f64>,
}

impl SolverFlag {
    pub fn of(stage: impl Into<String>, r: &RecoveryResult) -> Self {
        SolverFlag { stage: stage.into(), converged: r.converged, iterations: r.iterations, residual: Some(r.residual) }
    }

    /// For drivers that only report convergence.
    pub fn bare(stage: impl Into<String>, converged: bool) -> Self {
        SolverFlag { stage: stage.into(), converged, iterations: 0, residual: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub seed: u64,
    /// `ok` or `not_converged`.
    pub status: String,
    pub config: serde_json::Value,
    pub metrics: serde_json::Value,
    pub solver: Vec<SolverFlag>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn all_converged(&self) -> bool {
        self.solver.iter().all(|f| f.converged)
    }
}

/// Output directory plus the list of files written into it.
#[derive(Debug)]
pub struct Artifacts {
    root: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Artifacts { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Registers `name` and returns its full path.
    pub fn path(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.root.join(name)
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, data).map_err(|e| CliError::io(&p, e))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).expect("artifact serialises");
        self.bytes(name, text.as_bytes())
    }

    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let p = self.path(name);
        write_csv(&p, header, rows)
    }

    /// Square image, clamped to `[0, 1]`.
    pub fn image(&mut self, name: &str, data: &[f64], n: usize) -> Result<()> {
        let p = self.path(name);
        save_image(&p, &GrayImage { width: n, height: data.len() / n.max(1), data: data.to_vec() })
    }

    /// `<stem>.pbm` and `<stem>.json`.
    pub fn mask(&mut self, stem: &str, map: &SamplingMap) -> Result<()> {
        let pbm = self.path(&format!("{stem}.pbm"));
        let json = self.path(&format!("{stem}.json"));
        write_mask(&pbm, &json, map)
    }

    /// `<stem>.bin` and `<stem>.json`.
    pub fn array(&mut self, stem: &str, data: &ArrayData, shape: Vec<usize>, extra: serde_json::Value) -> Result<()> {
        let bin = self.path(&format!("{stem}.bin"));
        let json = self.path(&format!("{stem}.json"));
        write_array(&bin, &json, data, &ArrayMeta::new(data, shape, extra))
    }

    /// Hashes every registered file (in registration order) and writes the
    /// manifest next to them.
    pub fn finish(
        self,
        kind: &str,
        seed: u64,
        config: serde_json::Value,
        metrics: serde_json::Value,
        solver: Vec<SolverFlag>,
    ) -> Result<Manifest> {
        let mut files = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let p = self.root.join(name);
            let data = std::fs::read(&p).map_err(|e| CliError::io(&p, e))?;
            files.push(FileEntry { path: name.clone(), sha256: sha256_hex(&data), bytes: data.len() as u64 });
        }
        let manifest = Manifest {
            tool: "mlcs".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            kind: kind.into(),
            seed,
            status: if solver.iter().all(|f| f.converged) { "ok" } else { "not_converged" }.into(),
            config,
            metrics,
            solver,
            files,
        };
        let p = self.root.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
        Ok(manifest)
    }
}
