//! `evaluate`: one report per logits file plus a cross-model summary table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use refined_bias_core::data::load_logits;
use refined_bias_core::metrics::{evaluate_model, EvaluateOptions};
use refined_bias_core::report::{metrics_long_csv, summary_csv};
use refined_bias_core::{EvaluationReport, StimulusManifest};

use crate::{write_output, Outcome};

/// `runs/resnet50.csv` → `runs/resnet50.meta.json`.
pub fn sidecar_path(logits: &Path) -> PathBuf {
    let stem = logits.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    logits.with_file_name(format!("{stem}.meta.json"))
}

/// Flat string map from a JSON object; non-string scalars keep their JSON text.
fn read_metadata(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(value
        .into_iter()
        .map(|(k, v)| {
            let s = match v {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            (k, s)
        })
        .collect())
}

/// Load one logits file (and its metadata sidecar, if present) and evaluate it.
pub fn evaluate_path(path: &Path, manifest: &StimulusManifest, opts: &EvaluateOptions) -> Result<EvaluationReport> {
    let mut run = load_logits(path, manifest)?;
    let meta = sidecar_path(path);
    if meta.is_file() {
        run.metadata = read_metadata(&meta)?;
    }
    Ok(evaluate_model(&run, manifest, opts)?)
}

pub fn run(manifest: &StimulusManifest, runs: &[PathBuf], opts: &EvaluateOptions, out: &Path) -> Result<Outcome> {
    let results: Vec<(PathBuf, Result<EvaluationReport>)> =
        runs.par_iter().map(|p| (p.clone(), evaluate_path(p, manifest, opts))).collect();
    let mut outcome = Outcome::default();
    let mut reports = Vec::new();
    for (path, r) in results {
        match r {
            Ok(report) => reports.push(report),
            Err(e) => outcome.fail(path.display().to_string(), format!("{e:#}")),
        }
    }
    reports.sort_by(|a, b| a.model_id.cmp(&b.model_id));
    for r in &reports {
        write_output(&mut outcome, out, &format!("{}.report.json", r.model_id), &r.to_json())?;
    }
    write_output(&mut outcome, out, "summary.csv", &summary_csv(&reports))?;
    write_output(&mut outcome, out, "metrics_long.csv", &metrics_long_csv(&reports))?;
    Ok(outcome)
}
