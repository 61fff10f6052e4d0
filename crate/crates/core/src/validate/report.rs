use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::MetricValue;
use crate::cluster::ClusterMethod;
use crate::dimred::DrMethod;

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("duplicate cell ({clustering}, {dr})")]
    DuplicateCell { clustering: ClusterMethod, dr: DrMethod },
    #[error("malformed report JSON: {0}")]
    Json(String),
}

/// What a report's numbers describe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportScope {
    Policy { policy_id: String },
    /// Unweighted mean of per-policy values.
    CorpusMean { n_policies: usize },
}

impl ReportScope {
    fn describe(&self) -> String {
        match self {
            ReportScope::Policy { policy_id } => format!("policy {policy_id}"),
            ReportScope::CorpusMean { n_policies: 1 } => "unweighted mean over 1 policy".to_string(),
            ReportScope::CorpusMean { n_policies } => format!("unweighted mean over {n_policies} policies"),
        }
    }
}

const LDA_NOTE: &str = "LDA labels come from node text; each column scores the same labels on that projection";

/// Silhouette and Davies-Bouldin values keyed by clustering method (rows)
/// and projection (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    scope: ReportScope,
    cells: BTreeMap<(ClusterMethod, DrMethod), MetricValue>,
}

#[derive(Serialize, Deserialize)]
struct CellJson {
    clustering: ClusterMethod,
    dr: DrMethod,
    #[serde(flatten)]
    value: MetricValue,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    scope: ReportScope,
    columns: Vec<String>,
    rows: Vec<String>,
    cells: Vec<CellJson>,
    notes: Vec<String>,
}

fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.4}"),
        None => "undef".into(),
    }
}

impl MetricsReport {
    pub fn build(
        scope: ReportScope,
        cells: impl IntoIterator<Item = (DrMethod, ClusterMethod, MetricValue)>,
    ) -> Result<Self, ReportError> {
        let mut map = BTreeMap::new();
        for (dr, clustering, value) in cells {
            if map.insert((clustering, dr), value).is_some() {
                return Err(ReportError::DuplicateCell { clustering, dr });
            }
        }
        Ok(Self { scope, cells: map })
    }

    pub fn scope(&self) -> &ReportScope {
        &self.scope
    }

    pub fn get(&self, dr: DrMethod, clustering: ClusterMethod) -> Option<&MetricValue> {
        self.cells.get(&(clustering, dr))
    }

    pub fn cells(&self) -> impl Iterator<Item = (DrMethod, ClusterMethod, &MetricValue)> {
        self.cells.iter().map(|(&(c, d), v)| (d, c, v))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The five default rows, plus DBSCAN when it has a cell.
    pub fn rows(&self) -> Vec<ClusterMethod> {
        let mut rows = ClusterMethod::DEFAULT_GRID.to_vec();
        if self.cells.keys().any(|(c, _)| *c == ClusterMethod::Dbscan) {
            rows.push(ClusterMethod::Dbscan);
        }
        rows
    }

    fn cell_text(&self, c: ClusterMethod, d: DrMethod, pick: fn(&MetricValue) -> Option<f64>) -> String {
        match self.get(d, c) {
            None => "n/a".into(),
            Some(v) if !v.is_defined() => "undef".into(),
            Some(v) => fmt_value(pick(v)),
        }
    }

    fn notes(&self) -> Vec<String> {
        let mut notes = vec![format!("scope: {}", self.scope.describe())];
        for (&(c, d), v) in &self.cells {
            if !v.is_defined() {
                notes.push(format!(
                    "{c} / {d}: undef (noise_fraction {:.4}, n_evaluated {}){}",
                    v.noise_fraction,
                    v.n_evaluated,
                    v.flag.as_ref().map(|f| format!(": {f}")).unwrap_or_default()
                ));
            } else if let Some(f) = &v.flag {
                notes.push(format!("{c} / {d}: {f}"));
            }
        }
        if self.cells.keys().any(|(c, _)| c.uses_text()) {
            notes.push(LDA_NOTE.to_string());
        }
        notes
    }

    /// Two stanzas, `silhouette` then `davies_bouldin`, each a title line, a
    /// `clustering,t-SNE,UMAP,PCA` header and one row per method. Notes follow
    /// as `#` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header = std::iter::once("clustering".to_string())
            .chain(DrMethod::ALL.iter().map(|d| d.display_name().to_string()))
            .collect::<Vec<_>>()
            .join(",");
        let stanzas: [(&str, fn(&MetricValue) -> Option<f64>); 2] =
            [("silhouette", |v| v.silhouette), ("davies_bouldin", |v| v.davies_bouldin)];
        for (i, (title, pick)) in stanzas.into_iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "{title}").unwrap();
            writeln!(out, "{header}").unwrap();
            for c in self.rows() {
                let cells: Vec<String> = DrMethod::ALL.iter().map(|&d| self.cell_text(c, d, pick)).collect();
                writeln!(out, "{},{}", c.display_name(), cells.join(",")).unwrap();
            }
        }
        out.push('\n');
        for n in self.notes() {
            writeln!(out, "# {n}").unwrap();
        }
        out
    }

    /// Fixed-width table for terminals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let stanzas: [(&str, fn(&MetricValue) -> Option<f64>); 2] =
            [("Silhouette", |v| v.silhouette), ("Davies-Bouldin", |v| v.davies_bouldin)];
        for (title, pick) in stanzas {
            writeln!(out, "{title}").unwrap();
            write!(out, "{:<16}", "").unwrap();
            for d in DrMethod::ALL {
                write!(out, "{:>10}", d.display_name()).unwrap();
            }
            out.push('\n');
            for c in self.rows() {
                write!(out, "{:<16}", c.display_name()).unwrap();
                for d in DrMethod::ALL {
                    write!(out, "{:>10}", self.cell_text(c, d, pick)).unwrap();
                }
                out.push('\n');
            }
            out.push('\n');
        }
        for n in self.notes() {
            writeln!(out, "* {n}").unwrap();
        }
        out
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Vec<u8> {
        let doc = ReportJson {
            scope: self.scope.clone(),
            columns: DrMethod::ALL.iter().map(|d| d.display_name().to_string()).collect(),
            rows: self.rows().iter().map(|c| c.display_name().to_string()).collect(),
            cells: self.cells.iter().map(|(&(clustering, dr), v)| CellJson { clustering, dr, value: v.clone() }).collect(),
            notes: self.notes(),
        };
        let mut out = serde_json::to_vec_pretty(&doc).expect("report serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ReportError> {
        let doc: ReportJson = serde_json::from_slice(bytes).map_err(|e| ReportError::Json(e.to_string()))?;
        Self::build(doc.scope, doc.cells.into_iter().map(|c| (c.dr, c.clustering, c.value)))
    }

    /// Unweighted mean of each cell over the reports that have it. Means use
    /// only finite, defined values; the flag records how many contributed.
    pub fn corpus_mean(reports: &[MetricsReport]) -> MetricsReport {
        let mut keys: Vec<(ClusterMethod, DrMethod)> = reports.iter().flat_map(|r| r.cells.keys().copied()).collect();
        keys.sort();
        keys.dedup();
        let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        let mut cells = BTreeMap::new();
        for key in keys {
            let present: Vec<&MetricValue> = reports.iter().filter_map(|r| r.cells.get(&key)).collect();
            let sil: Vec<f64> = present.iter().filter_map(|v| v.silhouette).filter(|x| x.is_finite()).collect();
            let dbi: Vec<f64> = present.iter().filter_map(|v| v.davies_bouldin).filter(|x| x.is_finite()).collect();
            let noise: Vec<f64> = present.iter().map(|v| v.noise_fraction).collect();
            let (s, d) = (mean(&sil), mean(&dbi));
            let defined = s.is_some() && d.is_some();
            cells.insert(
                key,
                MetricValue {
                    silhouette: if defined { s } else { None },
                    davies_bouldin: if defined { d } else { None },
                    n_evaluated: present.iter().map(|v| v.n_evaluated).sum(),
                    noise_fraction: mean(&noise).unwrap_or(0.0),
                    flag: (sil.len() < present.len() || dbi.len() < present.len()).then(|| {
                        format!(
                            "silhouette from {}, davies_bouldin from {} of {} policies",
                            sil.len(),
                            dbi.len(),
                            present.len()
                        )
                    }),
                },
            );
        }
        MetricsReport { scope: ReportScope::CorpusMean { n_policies: reports.len() }, cells }
    }
}
