use serde::{Deserialize, Serialize};

use crate::{sha256_hex, RunConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub id: String,
    pub input: String,
    pub node_count: usize,
    pub edge_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileError {
    pub input: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Record of one run. Holds no timestamps or absolute paths, so repeated runs
/// of one config produce identical bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    /// Digest of every parameter that influences outputs (inputs and output
    /// directory excluded).
    pub params_sha256: String,
    pub policies: Vec<PolicyEntry>,
    pub errors: Vec<FileError>,
    pub files: Vec<FileEntry>,
}

pub fn params_digest(c: &RunConfig) -> String {
    let mut canonical = c.clone();
    canonical.inputs.clear();
    canonical.output_dir = Default::default();
    sha256_hex(&serde_json::to_vec(&canonical).expect("config serializes"))
}

impl Manifest {
    pub fn new(c: &RunConfig) -> Self {
        Self { seed: c.seed, params_sha256: params_digest(c), policies: Vec::new(), errors: Vec::new(), files: Vec::new() }
    }

    pub fn add_file(&mut self, path: String, bytes: &[u8]) {
        self.files.push(FileEntry { path, sha256: sha256_hex(bytes), bytes: bytes.len() });
    }

    /// Sorts files by path.
    pub fn finish(&mut self) {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("manifest serializes");
        out.push(b'\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_locations() {
        let a = RunConfig::with_seed(3);
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        b.inputs = vec!["x.graphml".into()];
        assert_eq!(params_digest(&a), params_digest(&b));
        b.set_seed(4);
        assert_ne!(params_digest(&a), params_digest(&b));
    }

    #[test]
    fn files_sorted_and_hashed() {
        let mut m = Manifest::new(&RunConfig::with_seed(0));
        m.add_file("b/x".into(), b"1");
        m.add_file("a/y".into(), b"");
        m.finish();
        assert_eq!(m.files[0].path, "a/y");
        assert_eq!(m.files[0].sha256, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        assert_eq!(m.files[1].bytes, 1);
    }
}
