//! Fleiss' kappa for a fixed number of raters per item.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub kappa: f64,
    pub n_items: usize,
    pub n_raters: u64,
    pub n_categories: usize,
    pub p_bar: f64,
    pub p_e: f64,
}

/// Item × category count matrix with labels, as read from or written to CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingsMatrix {
    pub item_ids: Vec<String>,
    pub categories: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl RatingsMatrix {
    /// Rater count of the first row (all rows must agree for kappa).
    pub fn n_raters(&self) -> u64 {
        self.counts.first().map(|r| r.iter().sum()).unwrap_or(0)
    }
}

pub fn fleiss_kappa(ratings: &[Vec<u64>], n_raters: u64) -> Result<KappaResult, StatsError> {
    if n_raters < 2 {
        return Err(StatsError::InvalidInput(format!("need at least 2 raters, got {n_raters}")));
    }
    let n_items = ratings.len();
    if n_items == 0 {
        return Err(StatsError::InsufficientSamples { needed: 1, found: 0 });
    }
    let n_categories = ratings[0].len();
    let n = n_raters as f64;
    let mut column_totals = vec![0u64; n_categories];
    let mut p_sum = 0.0;
    for (row, counts) in ratings.iter().enumerate() {
        if counts.len() != n_categories {
            return Err(StatsError::LengthMismatch(counts.len(), n_categories));
        }
        let total: u64 = counts.iter().sum();
        if total != n_raters {
            return Err(StatsError::RowSum { row, expected: n_raters, found: total });
        }
        let sq: u64 = counts.iter().map(|c| c * c).sum();
        p_sum += (sq - n_raters) as f64 / (n * (n - 1.0));
        for (t, c) in column_totals.iter_mut().zip(counts) {
            *t += c;
        }
    }
    let p_bar = p_sum / n_items as f64;
    let grand = (n_items as u64 * n_raters) as f64;
    let p_e: f64 = column_totals.iter().map(|&t| (t as f64 / grand).powi(2)).sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Err(StatsError::Degenerate);
    }
    Ok(KappaResult { kappa: (p_bar - p_e) / (1.0 - p_e), n_items, n_raters, n_categories, p_bar, p_e })
}

/// Parse `item_id,cat_1,...,cat_C` count CSV. Errors cite the 1-based file line.
pub fn parse_ratings_csv<R: Read>(reader: R) -> Result<RatingsMatrix, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| format!("line 1: {e}"))?.clone();
    if header.len() < 2 || header.get(0) != Some("item_id") {
        return Err("line 1: header must be item_id,<category>,...".into());
    }
    let categories: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut m = RatingsMatrix { item_ids: Vec::new(), categories, counts: Vec::new() };
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| format!("line {line}: {e}"))?;
        if rec.len() != m.categories.len() + 1 {
            return Err(format!("line {line}: expected {} fields, found {}", m.categories.len() + 1, rec.len()));
        }
        let counts = rec
            .iter()
            .skip(1)
            .map(|f| f.trim().parse::<u64>().map_err(|_| format!("line {line}: {f:?} is not a count")))
            .collect::<Result<Vec<_>, _>>()?;
        m.item_ids.push(rec[0].to_string());
        m.counts.push(counts);
    }
    Ok(m)
}

pub fn write_ratings_csv(m: &RatingsMatrix) -> String {
    let mut out = String::from("item_id");
    for c in &m.categories {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (id, row) in m.item_ids.iter().zip(&m.counts) {
        out.push_str(id);
        for c in row {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    out
}
