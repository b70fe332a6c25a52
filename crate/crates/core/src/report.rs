//! Cross-model tables: the per-model summary, family significance tests and
//! scatter-plot data with correlation sidecars.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::metrics::EvaluationReport;
use crate::stats::{pearson_r, strategy_t_test, Direction, StatsError};

/// Column order of the summary table.
pub const SUMMARY_COLUMNS: [&str; 10] = [
    "model_id",
    "in_domain_accuracy",
    "shape_sens",
    "texture_sens",
    "shape_preference",
    "texture_preference",
    "full_space_sb",
    "full_space_tb",
    "partial_space_sb",
    "partial_space_tb",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per model; absent metrics are empty cells.
pub fn summary_csv(reports: &[EvaluationReport]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS).expect("in-memory write");
    for r in reports {
        w.write_record([
            r.model_id.clone(),
            cell(r.in_domain_accuracy),
            cell(r.shape.as_ref().map(|s| s.sensitivity)),
            cell(r.texture.as_ref().map(|s| s.sensitivity)),
            cell(r.preference.map(|p| p.shape_preference)),
            cell(r.preference.map(|p| p.texture_preference)),
            cell(r.legacy_full.as_ref().map(|b| b.shape_bias)),
            cell(r.legacy_full.as_ref().map(|b| b.texture_bias)),
            cell(r.legacy_partial.as_ref().map(|b| b.shape_bias)),
            cell(r.legacy_partial.as_ref().map(|b| b.texture_bias)),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Long format: one `(model_id, metric, value)` row per available number.
pub fn metrics_long_csv(reports: &[EvaluationReport]) -> String {
    let summary = summary_csv(reports);
    let mut out = String::from("model_id,metric,value\n");
    let mut rdr = csv::Reader::from_reader(summary.as_bytes());
    for rec in rdr.records() {
        let rec = rec.expect("own output parses");
        for (col, value) in SUMMARY_COLUMNS.iter().zip(rec.iter()).skip(1) {
            if !value.is_empty() {
                out.push_str(&format!("{},{col},{value}\n", csv_field(&rec[0])));
            }
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A training-strategy family to test against the baseline model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    /// Expected direction, carried through to the table for reading alongside the result.
    #[serde(default)]
    pub expected: Option<String>,
    /// Member model ids. When omitted, models whose metadata `family` equals `name`.
    #[serde(default)]
    pub models: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamiliesConfig {
    /// Model id of the baseline whose shape preference is the reference value.
    pub baseline: String,
    pub families: Vec<FamilySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub family: String,
    pub expected: Option<String>,
    pub models: Vec<String>,
    pub n: usize,
    pub mean_preference: Option<f64>,
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    pub direction: Direction,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub baseline: String,
    pub baseline_preference: f64,
    pub alpha: f64,
    pub rows: Vec<CompareRow>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReportError {
    #[error("no families configured")]
    NoFamilies,
    #[error("baseline model {0:?} not among the reports")]
    MissingBaseline(String),
    #[error("model {0:?} has no shape preference")]
    MissingPreference(String),
}

/// Test each family's shape preferences against the baseline model's preference.
///
/// Per-family problems (too few models, zero variance, unknown members) are
/// reported in the row rather than failing the whole table. With zero
/// variance the exact mean difference decides: any nonzero difference is
/// treated as the `t → ±∞` limit (p = 0), a zero difference as p = 1.
pub fn compare_families(
    reports: &[EvaluationReport],
    config: &FamiliesConfig,
    alpha: f64,
) -> Result<CompareTable, ReportError> {
    if config.families.is_empty() {
        return Err(ReportError::NoFamilies);
    }
    let by_id: BTreeMap<&str, &EvaluationReport> = reports.iter().map(|r| (r.model_id.as_str(), r)).collect();
    let baseline =
        by_id.get(config.baseline.as_str()).ok_or_else(|| ReportError::MissingBaseline(config.baseline.clone()))?;
    let baseline_preference = baseline
        .preference
        .map(|p| p.shape_preference)
        .ok_or_else(|| ReportError::MissingPreference(config.baseline.clone()))?;

    let rows = config
        .families
        .iter()
        .map(|fam| {
            let models: Vec<String> = match &fam.models {
                Some(m) => m.clone(),
                None => reports
                    .iter()
                    .filter(|r| r.metadata.get("family") == Some(&fam.name))
                    .map(|r| r.model_id.clone())
                    .collect(),
            };
            let mut row = CompareRow {
                family: fam.name.clone(),
                expected: fam.expected.clone(),
                models: models.clone(),
                n: models.len(),
                mean_preference: None,
                t: None,
                df: None,
                p: None,
                direction: Direction::NonSignificant,
                error: None,
            };
            let mut values = Vec::with_capacity(models.len());
            for m in &models {
                match by_id.get(m.as_str()).and_then(|r| r.preference) {
                    Some(p) => values.push(p.shape_preference),
                    None => {
                        row.error = Some(format!("model {m:?} missing or without shape preference"));
                        return row;
                    }
                }
            }
            if !values.is_empty() {
                row.mean_preference = Some(values.iter().sum::<f64>() / values.len() as f64);
            }
            match strategy_t_test(&values, baseline_preference, alpha) {
                Ok(t) => {
                    row.mean_preference = Some(t.mean);
                    row.t = Some(t.t);
                    row.df = Some(t.df);
                    row.p = Some(t.p_two_sided);
                    row.direction = t.direction;
                }
                Err(StatsError::ZeroVariance { mean_difference }) => {
                    let p = if mean_difference == 0.0 { 1.0 } else { 0.0 };
                    row.df = Some((values.len() - 1) as f64);
                    row.p = Some(p);
                    row.direction = Direction::classify(mean_difference, p, alpha);
                    row.error = Some(StatsError::ZeroVariance { mean_difference }.to_string());
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    Ok(CompareTable { baseline: config.baseline.clone(), baseline_preference, alpha, rows })
}

impl CompareTable {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let opt = |v: Option<f64>, prec: usize| v.map(|x| format!("{x:.prec$}")).unwrap_or_else(|| "-".into());
        let mut out = format!(
            "Baseline `{}` (shape preference {:.4}), alpha = {}\n\n| family | expected | n | mean shape pref | t | df | p | direction | note |\n|---|---|---|---|---|---|---|---|---|\n",
            self.baseline, self.baseline_preference, self.alpha
        );
        for r in &self.rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
                r.family,
                r.expected.as_deref().unwrap_or("-"),
                r.n,
                opt(r.mean_preference, 4),
                opt(r.t, 3),
                opt(r.df, 0),
                opt(r.p, 4),
                r.direction.as_str(),
                r.error.as_deref().unwrap_or(""),
            ));
        }
        out
    }
}

/// One scatter panel: a metric against in-domain accuracy across models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub name: String,
    pub x: String,
    pub y: String,
    pub points: Vec<(String, f64, f64)>,
    pub pearson_r: Option<f64>,
    pub note: Option<String>,
}

impl Panel {
    pub fn to_csv(&self) -> String {
        let mut out = format!("model_id,{},{}\n", self.x, self.y);
        for (m, x, y) in &self.points {
            out.push_str(&format!("{},{x},{y}\n", csv_field(m)));
        }
        out
    }

    /// `{panel, x, y, n, pearson_r, note}` as pretty JSON.
    pub fn sidecar_json(&self) -> String {
        let v = serde_json::json!({
            "panel": self.name,
            "x": self.x,
            "y": self.y,
            "n": self.points.len(),
            "pearson_r": self.pearson_r,
            "note": self.note,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("sidecar serializes");
        s.push('\n');
        s
    }

    pub fn is_skipped(&self) -> bool {
        self.pearson_r.is_none()
    }
}

type Metric = fn(&EvaluationReport) -> Option<f64>;

const PANELS: [(&str, &str, Metric); 4] = [
    ("shape_preference_vs_accuracy", "shape_preference", |r| r.preference.map(|p| p.shape_preference)),
    ("shape_sens_vs_accuracy", "shape_sens", |r| r.shape.as_ref().map(|s| s.sensitivity)),
    ("texture_sens_vs_accuracy", "texture_sens", |r| r.texture.as_ref().map(|s| s.sensitivity)),
    ("full_space_sb_vs_accuracy", "full_space_sb", |r| r.legacy_full.as_ref().map(|b| b.shape_bias)),
];

/// Build every panel from the models that carry both in-domain accuracy and the metric.
pub fn report_panels(reports: &[EvaluationReport]) -> Vec<Panel> {
    PANELS
        .iter()
        .map(|(name, y, metric)| {
            let points: Vec<(String, f64, f64)> =
                reports.iter().filter_map(|r| Some((r.model_id.clone(), r.in_domain_accuracy?, metric(r)?))).collect();
            let (pearson, note) = if points.len() < 2 {
                (None, Some(format!("skipped: {} model(s) with in-domain accuracy and {y}", points.len())))
            } else {
                let xs: Vec<f64> = points.iter().map(|p| p.1).collect();
                let ys: Vec<f64> = points.iter().map(|p| p.2).collect();
                match pearson_r(&xs, &ys) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(format!("skipped: {e}"))),
                }
            };
            Panel {
                name: name.to_string(),
                x: "in_domain_accuracy".into(),
                y: y.to_string(),
                points,
                pearson_r: pearson,
                note,
            }
        })
        .collect()
}
