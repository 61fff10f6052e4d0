use std::path::{Path, PathBuf};

use ppkg_core::cluster::{ClusterMethod, ClusterParams};
use ppkg_core::dimred::{DrMethod, TsneParams, UmapParams};
use ppkg_core::embed::LayoutParams;
use serde::{Deserialize, Serialize};

use crate::PipelineError;

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_top_terms() -> usize {
    5
}

fn default_dr() -> Vec<DrMethod> {
    DrMethod::ALL.to_vec()
}

fn default_clustering() -> Vec<ClusterMethod> {
    ClusterMethod::DEFAULT_GRID.to_vec()
}

/// A full pipeline run. `seed` has no default; it overrides the seed inside
/// every parameter block so one number replays the whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// GraphML files or directories (searched for `*.graphml`, non-recursive).
    /// Relative paths resolve against the config file's directory.
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub layout: LayoutParams,
    #[serde(default = "default_dr")]
    pub dr: Vec<DrMethod>,
    #[serde(default)]
    pub tsne: TsneParams,
    #[serde(default)]
    pub umap: UmapParams,
    #[serde(default = "default_clustering")]
    pub clustering: Vec<ClusterMethod>,
    #[serde(default)]
    pub cluster_params: ClusterParams,
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Terms listed per cluster in annotations and legends.
    #[serde(default = "default_top_terms")]
    pub top_terms: usize,
}

impl RunConfig {
    /// A config with the default grid and the given seed.
    pub fn with_seed(seed: u64) -> Self {
        let mut c: RunConfig = serde_json::from_value(serde_json::json!({ "seed": seed })).expect("defaults deserialize");
        c.apply_seed();
        c
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, PipelineError> {
        let mut c: RunConfig = serde_json::from_slice(bytes).map_err(|e| PipelineError::Config(e.to_string()))?;
        c.apply_seed();
        c.validate()?;
        Ok(c)
    }

    /// Reads a config file; relative inputs and output dir are anchored at
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let bytes = std::fs::read(path).map_err(|e| PipelineError::Io(path.to_path_buf(), e.to_string()))?;
        let mut c = Self::from_json(&bytes)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in c.inputs.iter_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if c.output_dir.is_relative() {
            c.output_dir = base.join(&c.output_dir);
        }
        Ok(c)
    }

    /// Copies the master seed into every parameter block.
    pub fn apply_seed(&mut self) {
        self.layout.seed = self.seed;
        self.tsne.seed = self.seed;
        self.umap.seed = self.seed;
        self.cluster_params.seed = self.seed;
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.apply_seed();
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.dr.is_empty() {
            return Err(PipelineError::Config("at least one dr method is required".into()));
        }
        if self.clustering.is_empty() {
            return Err(PipelineError::Config("at least one clustering method is required".into()));
        }
        for (name, dup) in [("dr", has_duplicates(&self.dr)), ("clustering", has_duplicates(&self.clustering))] {
            if dup {
                return Err(PipelineError::Config(format!("{name} lists a method twice")));
            }
        }
        self.cluster_params.validate().map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Expands directories to their `*.graphml` files, sorted by path.
    pub fn resolve_inputs(&self) -> Result<Vec<PathBuf>, PipelineError> {
        let mut out = Vec::new();
        for p in &self.inputs {
            if p.is_dir() {
                let entries = std::fs::read_dir(p).map_err(|e| PipelineError::Io(p.clone(), e.to_string()))?;
                let mut files: Vec<PathBuf> = entries
                    .filter_map(Result::ok)
                    .map(|e| e.path())
                    .filter(|f| f.is_file() && f.extension().is_some_and(|x| x.eq_ignore_ascii_case("graphml")))
                    .collect();
                files.sort();
                out.extend(files);
            } else {
                out.push(p.clone());
            }
        }
        if out.is_empty() {
            return Err(PipelineError::NoValidInputs);
        }
        Ok(out)
    }
}

fn has_duplicates<T: PartialEq>(v: &[T]) -> bool {
    v.iter().enumerate().any(|(i, a)| v[..i].contains(a))
}
