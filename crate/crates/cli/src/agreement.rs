//! `agreement`: Fleiss' kappa per ratings matrix.
//!
//! Accepts ratings CSVs (`item_id,<category>...`) and survey export JSON
//! (an array of matrices as served by `GET /export`).

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use refined_bias_core::stats::{fleiss_kappa, parse_ratings_csv, RatingsMatrix};
use refined_bias_core::survey::ExportMatrix;
use refined_bias_core::KappaResult;
use serde::Serialize;

use crate::{write_output, Outcome};

#[derive(Debug, Serialize)]
pub struct AgreementRow {
    pub source: String,
    pub label: String,
    pub result: KappaResult,
}

fn matrices(path: &Path) -> Result<Vec<(String, RatingsMatrix)>> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let export: Vec<ExportMatrix> =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(export.into_iter().map(|m| (format!("{}/{}", m.dataset, m.cue_type), m.ratings)).collect())
    } else {
        let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let m = parse_ratings_csv(file).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        Ok(vec![(stem, m)])
    }
}

pub fn run(inputs: &[PathBuf], out: &Path) -> Result<(Outcome, Vec<AgreementRow>)> {
    let mut outcome = Outcome::default();
    let mut rows = Vec::new();
    for path in inputs {
        let source = path.display().to_string();
        match matrices(path) {
            Ok(ms) => {
                for (label, m) in ms {
                    match fleiss_kappa(&m.counts, m.n_raters()) {
                        Ok(result) => rows.push(AgreementRow { source: source.clone(), label, result }),
                        Err(e) => outcome.fail(format!("{source} ({label})"), e),
                    }
                }
            }
            Err(e) => outcome.fail(source, format!("{e:#}")),
        }
    }
    let mut text = serde_json::to_string_pretty(&rows)?;
    text.push('\n');
    write_output(&mut outcome, out, "agreement.json", &text)?;
    Ok((outcome, rows))
}
