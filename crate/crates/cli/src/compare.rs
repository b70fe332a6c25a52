//! `compare`: family-vs-baseline t-tests on shape preference.

use std::path::Path;

use anyhow::{bail, Context, Result};
use refined_bias_core::report::{compare_families, CompareTable, FamiliesConfig};
use refined_bias_core::EvaluationReport;

use crate::{write_output, Outcome};

pub fn read_families(path: &Path) -> Result<FamiliesConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: FamiliesConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if cfg.families.is_empty() {
        bail!("{} defines no families", path.display());
    }
    Ok(cfg)
}

/// Writes `compare.json` and `compare.md`. A family whose test could not be
/// run (too few models, missing members) counts as a per-item failure.
pub fn run(
    reports: &[EvaluationReport],
    families: &FamiliesConfig,
    alpha: f64,
    out: &Path,
    outcome: &mut Outcome,
) -> Result<CompareTable> {
    let table = compare_families(reports, families, alpha)?;
    for row in &table.rows {
        if row.p.is_none() {
            outcome.fail(format!("family {}", row.family), row.error.as_deref().unwrap_or("no test"));
        }
    }
    write_output(outcome, out, "compare.json", &table.to_json())?;
    write_output(outcome, out, "compare.md", &table.to_markdown())?;
    Ok(table)
}
