use std::collections::HashSet;
use std::path::{Path, PathBuf};

use ppkg_core::embed::spring_layout;
use ppkg_core::graph::{parse_graphml, PolicyGraph};
use ppkg_core::validate::MetricsReport;
use rayon::prelude::*;

use crate::grid::{evaluate_grid, policy_files};
use crate::manifest::{FileError, Manifest, PolicyEntry};
use crate::{PipelineError, RunConfig};

#[derive(Debug)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub output_dir: PathBuf,
    pub corpus_report: MetricsReport,
}

impl RunSummary {
    /// True when at least one input could not be processed.
    pub fn is_partial(&self) -> bool {
        !self.manifest.errors.is_empty()
    }

    /// 0 for a clean run, 2 when some inputs failed.
    pub fn exit_code(&self) -> i32 {
        if self.is_partial() {
            2
        } else {
            0
        }
    }
}

struct PolicyOutput {
    entry: PolicyEntry,
    files: Vec<(String, Vec<u8>)>,
    report: Option<MetricsReport>,
}

/// Policy id from the file stem.
pub fn policy_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "policy".into())
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Layout, grid and files for one parsed graph. An empty graph yields only
/// its export.
pub fn process_graph(id: &str, g: &PolicyGraph, c: &RunConfig) -> (Vec<(String, Vec<u8>)>, Option<MetricsReport>) {
    match spring_layout(g, &c.layout) {
        Ok(embedding) => {
            let grid = evaluate_grid(id, g, &embedding, c);
            let files = policy_files(g, Some(&embedding), Some(&grid));
            (files, Some(grid.report))
        }
        Err(e) => {
            log::warn!("{id}: layout skipped: {e}");
            (policy_files(g, None, None), None)
        }
    }
}

fn process_input(path: &Path, c: &RunConfig) -> Result<PolicyOutput, String> {
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    let g = parse_graphml(&bytes).map_err(|e| e.to_string())?;
    let id = policy_id(path);
    log::info!("{id}: {} nodes, {} edges", g.node_count(), g.edge_count());
    let (files, report) = process_graph(&id, &g, c);
    Ok(PolicyOutput {
        entry: PolicyEntry { id, input: file_name(path), node_count: g.node_count(), edge_count: g.edge_count() },
        files,
        report,
    })
}

fn write_file(root: &Path, rel: &str, bytes: &[u8]) -> Result<(), PipelineError> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| PipelineError::Io(parent.to_path_buf(), e.to_string()))?;
    }
    std::fs::write(&path, bytes).map_err(|e| PipelineError::Io(path, e.to_string()))
}

/// Runs every input through the grid, writes artifacts under
/// `c.output_dir`, and records them in `manifest.json`. Inputs that fail to
/// read or parse are listed as errors and skipped; if none succeed the run
/// fails with [`PipelineError::NoValidInputs`] after writing the manifest.
pub fn run_pipeline(c: &RunConfig) -> Result<RunSummary, PipelineError> {
    c.validate()?;
    let inputs = c.resolve_inputs()?;
    let outputs: Vec<Result<PolicyOutput, String>> = inputs.par_iter().map(|p| process_input(p, c)).collect();

    let out_dir = c.output_dir.clone();
    let mut manifest = Manifest::new(c);
    let mut reports = Vec::new();
    let mut seen = HashSet::new();
    for (path, result) in inputs.iter().zip(outputs) {
        let output = result.and_then(|o| {
            if seen.insert(o.entry.id.clone()) {
                Ok(o)
            } else {
                Err(format!("duplicate policy id {:?}", o.entry.id))
            }
        });
        match output {
            Ok(o) => {
                for (rel, bytes) in &o.files {
                    let rel = format!("{}/{rel}", o.entry.id);
                    write_file(&out_dir, &rel, bytes)?;
                    manifest.add_file(rel, bytes);
                }
                reports.extend(o.report);
                manifest.policies.push(o.entry);
            }
            Err(error) => {
                log::error!("{}: {error}", path.display());
                manifest.errors.push(FileError { input: file_name(path), error });
            }
        }
    }

    let corpus_report = MetricsReport::corpus_mean(&reports);
    if !manifest.policies.is_empty() {
        let corpus_csv = corpus_report.to_csv().into_bytes();
        let corpus_json = corpus_report.to_json();
        for (rel, bytes) in [("corpus_metrics.csv", &corpus_csv), ("corpus_metrics.json", &corpus_json)] {
            write_file(&out_dir, rel, bytes)?;
            manifest.add_file(rel.to_string(), bytes);
        }
    }
    manifest.finish();
    write_file(&out_dir, "manifest.json", &manifest.to_json())?;
    if manifest.policies.is_empty() {
        return Err(PipelineError::NoValidInputs);
    }
    Ok(RunSummary { manifest, output_dir: out_dir, corpus_report })
}
