//! `report`: scatter-ready CSVs with a Pearson-r sidecar per panel.

use std::path::Path;

use anyhow::Result;
use refined_bias_core::report::{report_panels, Panel};
use refined_bias_core::EvaluationReport;

use crate::{write_output, Outcome};

/// Writes `<panel>.csv` and `<panel>.json` for every panel, plus `panels.json`
/// listing all panels (skipped ones carry a note and no CSV).
pub fn run(reports: &[EvaluationReport], out: &Path, outcome: &mut Outcome) -> Result<Vec<Panel>> {
    let panels = report_panels(reports);
    let mut index = Vec::new();
    for p in &panels {
        if let Some(note) = &p.note {
            log::warn!("{}: {note}", p.name);
        }
        if !p.is_skipped() {
            write_output(outcome, out, &format!("{}.csv", p.name), &p.to_csv())?;
        }
        write_output(outcome, out, &format!("{}.json", p.name), &p.sidecar_json())?;
        index.push(
            serde_json::json!({ "panel": p.name, "n": p.points.len(), "pearson_r": p.pearson_r, "note": p.note }),
        );
    }
    let mut text = serde_json::to_string_pretty(&index)?;
    text.push('\n');
    write_output(outcome, out, "panels.json", &text)?;
    Ok(panels)
}
