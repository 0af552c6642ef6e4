//! Run configuration, read from TOML and adjusted by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sciclf::analytics::Averaging;
use sciclf::clf::TrainConfig;
use sciclf::ingest::{store::DEFAULT_MAP_SIZE, DEFAULT_MAX_LEN, DEFAULT_VOCAB_K};
use sciclf::Mode;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub taxonomy: Option<PathBuf>,
    /// `paper_id \t index_length \t inverted_index_json` lines.
    pub abstracts: Option<PathBuf>,
    /// `paper_id \t tag [\t level]` lines.
    pub fos: Option<PathBuf>,
    pub descriptors: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    /// Defaults to `<output>/store`.
    pub store: Option<PathBuf>,
    pub output: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            taxonomy: None,
            abstracts: None,
            fos: None,
            descriptors: None,
            citations: None,
            store: None,
            output: PathBuf::from("run"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSettings {
    pub vocab_k: usize,
    pub max_len: usize,
    /// Sequences per stored batch.
    pub store_batch_size: usize,
    pub map_size: usize,
}

impl Default for IngestSettings {
    fn default() -> Self {
        IngestSettings {
            vocab_k: DEFAULT_VOCAB_K,
            max_len: DEFAULT_MAX_LEN,
            store_batch_size: 1024,
            map_size: DEFAULT_MAP_SIZE,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelSettings {
    /// Level of the primary label used to stratify the split.
    pub strata_level: u8,
    /// Minimum tag level, keyed by discipline code.
    pub min_level: BTreeMap<String, u8>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    #[default]
    Annotations,
    Predictions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSettings {
    pub labels: LabelSource,
    /// Clip normalized grids at this value; off when absent.
    pub truncate: Option<f64>,
    /// Cutoff for the highlighted discipline output cells.
    pub highlight: f64,
    pub averaging: Averaging,
}

impl Default for AnalyzeSettings {
    fn default() -> Self {
        AnalyzeSettings {
            labels: LabelSource::Annotations,
            truncate: None,
            highlight: sciclf::analytics::DEFAULT_HIGHLIGHT,
            averaging: Averaging::Simple,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds the split and every node's shuffles; overrides `train.seed`.
    pub seed: u64,
    pub mode: Mode,
    pub paths: Paths,
    pub ingest: IngestSettings,
    pub label: LabelSettings,
    pub train: TrainConfig,
    pub analyze: AnalyzeSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            mode: Mode::Single,
            paths: Paths::default(),
            ingest: IngestSettings::default(),
            label: LabelSettings::default(),
            train: TrainConfig::default(),
            analyze: AnalyzeSettings::default(),
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub threshold: Option<f64>,
    pub truncate: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Parse a TOML file; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.train.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        for opt in [&mut p.taxonomy, &mut p.abstracts, &mut p.fos, &mut p.descriptors, &mut p.citations, &mut p.store] {
            if let Some(path) = opt {
                join(path);
            }
        }
        join(&mut p.output);
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(mode) = o.mode {
            self.mode = mode;
        }
        if let Some(t) = o.threshold {
            self.train.threshold = t;
        }
        if let Some(t) = o.truncate {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--truncate must be a non-negative number, got {t}")));
            }
            self.analyze.truncate = Some(t);
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        self.train.seed = self.seed;
        self.validate()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.train.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if self.ingest.vocab_k == 0 || self.ingest.max_len == 0 || self.ingest.store_batch_size == 0 {
            return Err(CliError::Usage("ingest sizes must be positive".into()));
        }
        if self.label.strata_level > 2 {
            return Err(CliError::Usage(format!(
                "label.strata_level must be 0, 1 or 2, got {}",
                self.label.strata_level
            )));
        }
        Ok(())
    }

    pub fn store_dir(&self) -> PathBuf {
        self.paths.store.clone().unwrap_or_else(|| self.paths.output.join("store"))
    }

    /// An input path that must be configured and exist.
    pub fn input(&self, name: &str, path: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        let path = path.as_ref().ok_or_else(|| CliError::Usage(format!("paths.{name} is not configured")))?;
        if !path.exists() {
            return Err(CliError::Usage(format!("paths.{name}: {} does not exist", path.display())));
        }
        Ok(path.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "seed = 4\nmode = \"multi\"\n[paths]\ntaxonomy = \"tax.tsv\"\noutput = \"out\"\n[train]\nbatch_size = 8\n",
        )
        .unwrap();
        let mut cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.paths.taxonomy.as_deref(), Some(dir.path().join("tax.tsv").as_path()));
        assert_eq!(cfg.store_dir(), dir.path().join("out").join("store"));
        assert_eq!((cfg.mode, cfg.train.seed, cfg.train.batch_size), (Mode::Multi, 4, 8));
        cfg.apply(&Overrides { seed: Some(9), threshold: Some(0.3), ..Default::default() }).unwrap();
        assert_eq!((cfg.seed, cfg.train.seed, cfg.train.threshold), (9, 9, 0.3));
        assert!(cfg.apply(&Overrides { threshold: Some(1.5), ..Default::default() }).is_err());

        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(CliError::Usage(_))));
    }
}
