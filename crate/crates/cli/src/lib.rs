//! Subcommand implementations behind the `refined-bias` binary.
//!
//! Every command returns an [`Outcome`] listing the per-item failures it
//! isolated; the binary exits 0 only when that list is empty.

pub mod agreement;
pub mod compare;
pub mod evaluate;
pub mod generate;
pub mod plots;
pub mod server;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use refined_bias_core::data::load_manifest;
use refined_bias_core::EvaluationReport;
use refined_bias_core::StimulusManifest;

/// Result of a subcommand that processes independent items.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub failures: Vec<(String, String)>,
}

impl Outcome {
    pub fn fail(&mut self, item: impl Into<String>, error: impl std::fmt::Display) {
        let item = item.into();
        log::error!("{item}: {error}");
        self.failures.push((item, error.to_string()));
    }

    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Sorted paths matching a glob pattern.
pub fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .with_context(|| format!("bad glob {pattern:?}"))?
        .filter_map(|p| p.ok())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn read_manifest(path: &Path) -> Result<StimulusManifest> {
    load_manifest(path).with_context(|| format!("loading manifest {}", path.display()))
}

/// Write `text` to `dir/name`, creating `dir`, and record the path.
pub fn write_output(outcome: &mut Outcome, dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    outcome.written.push(path);
    Ok(())
}

/// Load evaluation reports: `*.json` files are parsed as reports, anything
/// else is treated as a logits CSV and evaluated against `manifest`.
pub fn load_reports(
    paths: &[PathBuf],
    manifest: Option<&StimulusManifest>,
    opts: &refined_bias_core::metrics::EvaluateOptions,
    outcome: &mut Outcome,
) -> Result<Vec<EvaluationReport>> {
    let mut reports = Vec::new();
    for path in paths {
        let item = path.display().to_string();
        if path.extension().is_some_and(|e| e == "json") {
            let parsed = std::fs::read_to_string(path)
                .map_err(anyhow::Error::from)
                .and_then(|t| serde_json::from_str::<EvaluationReport>(&t).map_err(Into::into));
            match parsed {
                Ok(r) => reports.push(r),
                Err(e) => outcome.fail(item, e),
            }
        } else {
            let Some(manifest) = manifest else {
                bail!("{item} is not a report JSON; pass --manifest to evaluate logits directly");
            };
            match evaluate::evaluate_path(path, manifest, opts) {
                Ok(r) => reports.push(r),
                Err(e) => outcome.fail(item, format!("{e:#}")),
            }
        }
    }
    reports.sort_by(|a, b| a.model_id.cmp(&b.model_id));
    Ok(reports)
}
