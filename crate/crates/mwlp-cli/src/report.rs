//! Deterministic report files: a JSON summary per run plus CSV detail
//! tables. JSON maps are ordered (BTreeMap-backed) and all floating-point
//! values come from fixed reduction orders upstream, so identical
//! `(config, seed)` runs produce byte-identical summaries.

use crate::config::ExperimentConfig;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Outcome of one experiment run.
#[derive(Debug)]
pub struct Outcome {
    /// All assertion-suite checks passed.
    pub pass: bool,
    pub results: Value,
    /// `(file name, rows)` CSV tables to write next to the summary.
    pub csv: Vec<(String, Vec<String>)>,
    /// Truncation range the run used.
    pub jmin: i32,
    pub jmax: i32,
}

/// SHA-256 of the canonical effective config text.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(cfg.canonical_text().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Assembles the summary document.
pub fn summary_json(cfg: &ExperimentConfig, outcome: &Outcome) -> Value {
    let mut config_map = Map::new();
    for (k, v) in cfg.echoed() {
        config_map.insert(k.clone(), Value::String(v.clone()));
    }
    json!({
        "kind": cfg.kind.name(),
        "config": Value::Object(config_map),
        "config_hash": config_hash(cfg),
        "version": LIBRARY_VERSION,
        "truncation": {"jmin": outcome.jmin, "jmax": outcome.jmax},
        "results": outcome.results,
        "pass": outcome.pass,
    })
}

/// Writes `summary.json` and the CSV tables into the output directory.
pub fn write_reports(cfg: &ExperimentConfig, outcome: &Outcome) -> std::io::Result<PathBuf> {
    let dir = Path::new(&cfg.out_dir);
    fs::create_dir_all(dir)?;
    let summary = summary_json(cfg, outcome);
    let path = dir.join(format!("{}-summary.json", cfg.kind.name()));
    let mut file = fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut file, &summary)?;
    file.write_all(b"\n")?;
    for (name, rows) in &outcome.csv {
        let mut f = fs::File::create(dir.join(name))?;
        for row in rows {
            writeln!(f, "{row}")?;
        }
    }
    Ok(path)
}
