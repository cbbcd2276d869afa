//! Run records, config hashing and report merging.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub tool_version: String,
    pub kind: String,
    pub seed: u64,
    pub status: RunStatus,
    pub wall_time_s: f64,
    /// Named verdicts (`cocanceling = confirmed`, `trend = divergent`, ...).
    pub verdicts: BTreeMap<String, String>,
    /// Headline number of the run (a constant, slope or ratio).
    pub key_constant: Option<f64>,
    /// Artifact file names relative to the record's directory.
    pub artifacts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// SHA-256 of the compact JSON rendering. `serde_json` maps keep keys
/// sorted, so the hash ignores key order in the source file.
pub fn config_hash(canonical: &serde_json::Value) -> String {
    let text = serde_json::to_string(canonical).expect("json value renders");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeSummary {
    pub tool_versions: Vec<String>,
    pub warnings: Vec<String>,
    /// One row per record, sorted by config hash.
    pub rows: Vec<RunRecord>,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    config_hash: &'a str,
    kind: &'a str,
    status: RunStatus,
    failed: bool,
    verdict: String,
    key_constant: Option<f64>,
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for p in entries {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if p.is_dir() || name == "record.json" || name == "summary.json" {
                collect_files(&p, out)?;
            }
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(r) = serde_json::from_str::<RunRecord>(&text) {
        return Ok(vec![r]);
    }
    serde_json::from_str::<MergeSummary>(&text)
        .map(|s| s.rows)
        .map_err(|e| Error::Format(format!("{}: neither a run record nor a summary: {e}", path.display())))
}

/// Merges records and summaries found under `inputs`. Identical records
/// collapse, so merging a summary with its own inputs changes nothing.
pub fn report_merge(inputs: &[PathBuf]) -> Result<MergeSummary> {
    let mut files = Vec::new();
    for p in inputs {
        collect_files(p, &mut files)?;
    }
    let mut rows = Vec::new();
    for f in &files {
        rows.extend(read_records(f)?);
    }
    if rows.is_empty() {
        return Err(Error::arg("no run records found to merge"));
    }
    let mut keyed: Vec<(String, String, RunRecord)> = rows
        .into_iter()
        .map(|r| {
            (
                r.config_hash.clone(),
                serde_json::to_string(&r).expect("record renders"),
                r,
            )
        })
        .collect();
    keyed.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    keyed.dedup_by(|a, b| a.1 == b.1);
    let rows: Vec<RunRecord> = keyed.into_iter().map(|k| k.2).collect();
    let versions: BTreeSet<String> = rows.iter().map(|r| r.tool_version.clone()).collect();
    let mut warnings = Vec::new();
    if versions.len() > 1 {
        warnings.push(format!(
            "records come from different tool versions: {}",
            versions.iter().cloned().collect::<Vec<_>>().join(", ")
        ));
    }
    let mut seen = BTreeMap::new();
    for r in &rows {
        *seen.entry(r.config_hash.as_str()).or_insert(0usize) += 1;
    }
    for (h, c) in seen {
        if c > 1 {
            warnings.push(format!("config {h} has {c} differing records"));
        }
    }
    Ok(MergeSummary {
        tool_versions: versions.into_iter().collect(),
        warnings,
        rows,
    })
}

impl MergeSummary {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        for r in &self.rows {
            let verdict = r
                .verdicts
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";");
            w.serialize(SummaryRow {
                config_hash: &r.config_hash,
                kind: &r.kind,
                status: r.status,
                failed: r.status == RunStatus::Failed,
                verdict,
                key_constant: r.key_constant,
            })
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}
