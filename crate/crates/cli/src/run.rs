//! Run directory layout, the process lock and per-stage manifests.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use sciclf::Mode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const LOCK_FILE: &str = ".lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Label,
    Ingest,
    Train(Mode),
    Infer(Mode),
    Analyze,
}

impl Stage {
    pub fn name(self) -> String {
        match self {
            Stage::Label => "label".into(),
            Stage::Ingest => "ingest".into(),
            Stage::Train(m) => format!("train-{m}"),
            Stage::Infer(m) => format!("infer-{m}"),
            Stage::Analyze => "analyze".into(),
        }
    }

    /// Stages that consume this stage's outputs, directly or not.
    pub fn downstream(self) -> Vec<Stage> {
        let modes = [Mode::Single, Mode::Multi];
        match self {
            Stage::Label | Stage::Ingest => {
                let mut v: Vec<Stage> = if self == Stage::Label { vec![Stage::Ingest] } else { Vec::new() };
                v.extend(modes.iter().flat_map(|&m| [Stage::Train(m), Stage::Infer(m)]));
                v.push(Stage::Analyze);
                v
            }
            Stage::Train(m) => vec![Stage::Infer(m), Stage::Analyze],
            Stage::Infer(_) => vec![Stage::Analyze],
            Stage::Analyze => Vec::new(),
        }
    }
}

/// Content hashes a stage consumed and produced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hash_file(path: &Path) -> Result<String, CliError> {
    Ok(hex_digest(&std::fs::read(path).map_err(|e| CliError::io(path, e))?))
}

/// Exclusive owner of an output directory for the lifetime of a command.
pub struct RunDir {
    root: PathBuf,
    lock: PathBuf,
}

impl RunDir {
    pub fn open(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root.join("manifests")).map_err(|e| CliError::io(root, e))?;
        let lock = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(CliError::Usage(format!(
                    "{} is locked by another sciclf process; remove {} if it is stale",
                    root.display(),
                    lock.display()
                )))
            }
            Err(e) => return Err(CliError::io(&lock, e)),
        }
        Ok(RunDir { root: root.to_path_buf(), lock })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Create (if needed) and return a subdirectory.
    pub fn dir(&self, rel: impl AsRef<Path>) -> Result<PathBuf, CliError> {
        let p = self.root.join(rel);
        std::fs::create_dir_all(&p).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    fn manifest_path(&self, stage: Stage) -> PathBuf {
        self.root.join("manifests").join(format!("{}.json", stage.name()))
    }

    pub fn manifest(&self, stage: Stage) -> Result<Option<Manifest>, CliError> {
        let path = self.manifest_path(stage);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::Data(format!("{}: corrupt manifest: {e}", path.display())))
    }

    /// The manifest of a stage that must already have run.
    pub fn require(&self, stage: Stage, hint: &str) -> Result<Manifest, CliError> {
        self.manifest(stage)?.ok_or_else(|| {
            CliError::Data(format!(
                "stage {} has not run (or was invalidated); run `sciclf {hint}` first",
                stage.name()
            ))
        })
    }

    /// Record a finished stage. Changed outputs invalidate every downstream
    /// stage by removing its manifest.
    pub fn commit(&self, stage: Stage, manifest: &Manifest) -> Result<(), CliError> {
        let previous = self.manifest(stage)?;
        if previous.as_ref().map(|m| &m.outputs) != Some(&manifest.outputs) {
            for down in stage.downstream() {
                let p = self.manifest_path(down);
                if p.exists() {
                    log::info!("{} outputs changed; invalidating {}", stage.name(), down.name());
                    std::fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
                }
            }
        }
        let path = self.manifest_path(stage);
        let mut text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.lock);
    }
}
