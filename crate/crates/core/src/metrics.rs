//! Ranking-based cue sensitivity, preference and cue-conflict decisions.
//!
//! Sensitivity is the mean reciprocal rank of the correct superclass in the
//! model's full logit ranking. A superclass spans several base classes; its
//! rank is the rank of its best-scoring member, with ties broken towards the
//! smaller class index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ModelRun, StimulusKind, StimulusManifest, Superclass};
use crate::rng::derive_seed;
use crate::stats::{bootstrap_ci, BootstrapCi};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("superclass {0:?} has no members")]
    EmptySuperclass(String),
    #[error("unknown superclass {0:?}")]
    UnknownSuperclass(String),
    #[error("member class {class} outside logit vector of length {len}")]
    MemberOutOfRange { class: usize, len: usize },
    #[error("no {0} stimuli in run")]
    NoStimuli(Cue),
    #[error("preference undefined: both sensitivities are zero")]
    Degenerate,
    #[error("no correct shape or texture decisions")]
    NoCorrectDecisions,
    #[error("run has no records")]
    EmptyRun,
    #[error("stimulus {0:?} not in manifest")]
    UnknownStimulus(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cue {
    Shape,
    Texture,
}

impl Cue {
    pub fn kind(self) -> StimulusKind {
        match self {
            Cue::Shape => StimulusKind::ShapeCue,
            Cue::Texture => StimulusKind::TextureCue,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Cue::Shape => "shape",
            Cue::Texture => "texture",
        }
    }
}

impl std::fmt::Display for Cue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub stimulus_id: String,
    pub target_superclass: String,
    pub rank: usize,
    pub reciprocal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub model_id: String,
    pub cue: Cue,
    pub value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceResult {
    pub shape_preference: f64,
    pub texture_preference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionOutcome {
    CorrectShape,
    CorrectTexture,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSpace {
    Full,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictDecision {
    pub stimulus_id: String,
    pub outcome: DecisionOutcome,
    pub space: DecisionSpace,
    /// Base class (full space) or superclass id (partial space) that won.
    pub predicted: String,
}

/// Which classes survive the post-hoc restriction of the partial space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartialMode {
    /// Union of every superclass in the manifest.
    #[default]
    AllSuperclasses,
    /// Only the stimulus' own shape and texture superclasses.
    ForcedChoice,
}

/// Index of the maximum, smallest index among ties.
fn argmax_by_index(logits: &[f64], indices: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for j in indices {
        match best {
            Some(b) if logits[j] > logits[b] || (logits[j] == logits[b] && j < b) => best = Some(j),
            None => best = Some(j),
            _ => {}
        }
    }
    best
}

/// 1-based rank of the best member of `members` in the descending ordering of
/// `logits` (ties broken by smaller index first).
pub fn best_member_rank(logits: &[f64], members: &[usize]) -> Result<usize, MetricsError> {
    if let Some(&class) = members.iter().find(|&&m| m >= logits.len()) {
        return Err(MetricsError::MemberOutOfRange { class, len: logits.len() });
    }
    let arg =
        argmax_by_index(logits, members.iter().copied()).ok_or_else(|| MetricsError::EmptySuperclass(String::new()))?;
    let best = logits[arg];
    let ahead = logits.iter().enumerate().filter(|&(j, &v)| v > best || (v == best && j < arg)).count();
    Ok(1 + ahead)
}

pub fn superclass_rank(stimulus_id: &str, logits: &[f64], superclass: &Superclass) -> Result<RankResult, MetricsError> {
    let rank = best_member_rank(logits, &superclass.members).map_err(|e| match e {
        MetricsError::EmptySuperclass(_) => MetricsError::EmptySuperclass(superclass.id.clone()),
        other => other,
    })?;
    Ok(RankResult {
        stimulus_id: stimulus_id.to_string(),
        target_superclass: superclass.id.clone(),
        rank,
        reciprocal: 1.0 / rank as f64,
    })
}

/// Per-stimulus ranks of the correct superclass for every stimulus of `cue`'s kind.
pub fn cue_ranks(run: &ModelRun, manifest: &StimulusManifest, cue: Cue) -> Result<Vec<RankResult>, MetricsError> {
    let mut out = Vec::new();
    for rec in &run.records {
        let entry = manifest
            .stimulus(&rec.stimulus_id)
            .ok_or_else(|| MetricsError::UnknownStimulus(rec.stimulus_id.clone()))?;
        if entry.kind != cue.kind() {
            continue;
        }
        let sc_id = entry.cue_superclass().expect("validated cue entry");
        let sc =
            manifest.superclasses().get(sc_id).ok_or_else(|| MetricsError::UnknownSuperclass(sc_id.to_string()))?;
        out.push(superclass_rank(&rec.stimulus_id, &rec.logits, sc)?);
    }
    Ok(out)
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values.sum::<f64>() / n as f64
}

pub fn cue_sensitivity(
    run: &ModelRun,
    manifest: &StimulusManifest,
    cue: Cue,
) -> Result<SensitivityResult, MetricsError> {
    let ranks = cue_ranks(run, manifest, cue)?;
    if ranks.is_empty() {
        return Err(MetricsError::NoStimuli(cue));
    }
    Ok(SensitivityResult {
        model_id: run.model_id.clone(),
        cue,
        value: mean(ranks.iter().map(|r| r.reciprocal)),
        n: ranks.len(),
    })
}

/// Shape preference `s / (s + t)`; texture preference is its complement.
pub fn preference_from_values(shape_sens: f64, texture_sens: f64) -> Result<PreferenceResult, MetricsError> {
    let total = shape_sens + texture_sens;
    if total.is_nan() || total <= 0.0 || shape_sens < 0.0 || texture_sens < 0.0 {
        return Err(MetricsError::Degenerate);
    }
    let shape_preference = shape_sens / total;
    Ok(PreferenceResult { shape_preference, texture_preference: 1.0 - shape_preference })
}

pub fn preference(shape: &SensitivityResult, texture: &SensitivityResult) -> Result<PreferenceResult, MetricsError> {
    preference_from_values(shape.value, texture.value)
}

fn outcome_for(predicted_sc: Option<&str>, shape_sc: &Superclass, texture_sc: &Superclass) -> DecisionOutcome {
    match predicted_sc {
        Some(id) if id == shape_sc.id => DecisionOutcome::CorrectShape,
        Some(id) if id == texture_sc.id => DecisionOutcome::CorrectTexture,
        _ => DecisionOutcome::Neither,
    }
}

/// Decision from the global argmax over all classes.
pub fn full_space_decision(
    stimulus_id: &str,
    logits: &[f64],
    shape_sc: &Superclass,
    texture_sc: &Superclass,
) -> ConflictDecision {
    let top = argmax_by_index(logits, 0..logits.len()).expect("non-empty logits");
    let owner = if shape_sc.members.contains(&top) {
        Some(shape_sc.id.as_str())
    } else if texture_sc.members.contains(&top) {
        Some(texture_sc.id.as_str())
    } else {
        None
    };
    ConflictDecision {
        stimulus_id: stimulus_id.to_string(),
        outcome: outcome_for(owner, shape_sc, texture_sc),
        space: DecisionSpace::Full,
        predicted: top.to_string(),
    }
}

/// Decision after restricting the logits to benchmark candidate classes.
///
/// Each candidate superclass is scored by its best member logit. The winner
/// is the superclass holding the restricted argmax class (smallest index among
/// tied maxima), which keeps the tie-break consistent with the full space.
pub fn partial_space_decision(
    stimulus_id: &str,
    logits: &[f64],
    manifest: &StimulusManifest,
    shape_sc: &Superclass,
    texture_sc: &Superclass,
    mode: PartialMode,
) -> ConflictDecision {
    let candidates: Vec<&Superclass> = match mode {
        PartialMode::AllSuperclasses => manifest.superclasses().iter().collect(),
        PartialMode::ForcedChoice => vec![shape_sc, texture_sc],
    };
    let mut winner: Option<(&Superclass, usize)> = None;
    for sc in candidates {
        let arg = argmax_by_index(logits, sc.members.iter().copied()).expect("non-empty superclass");
        match winner {
            Some((_, b)) if logits[arg] > logits[b] || (logits[arg] == logits[b] && arg < b) => {
                winner = Some((sc, arg))
            }
            None => winner = Some((sc, arg)),
            _ => {}
        }
    }
    let predicted = winner.map(|(sc, _)| sc.id.as_str());
    ConflictDecision {
        stimulus_id: stimulus_id.to_string(),
        outcome: outcome_for(predicted, shape_sc, texture_sc),
        space: DecisionSpace::Partial,
        predicted: predicted.unwrap_or_default().to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegacyBias {
    pub shape_bias: f64,
    pub texture_bias: f64,
    pub n_correct_shape: usize,
    pub n_correct_texture: usize,
    pub n_neither: usize,
}

/// Share of correct-shape decisions among all correct decisions.
pub fn legacy_bias_from_counts(n_shape: usize, n_texture: usize) -> Result<(f64, f64), MetricsError> {
    let total = n_shape + n_texture;
    if total == 0 {
        return Err(MetricsError::NoCorrectDecisions);
    }
    Ok((n_shape as f64 / total as f64, n_texture as f64 / total as f64))
}

pub fn legacy_bias(decisions: &[ConflictDecision]) -> Result<LegacyBias, MetricsError> {
    let count = |o| decisions.iter().filter(|d| d.outcome == o).count();
    let (n_s, n_t, n_n) =
        (count(DecisionOutcome::CorrectShape), count(DecisionOutcome::CorrectTexture), count(DecisionOutcome::Neither));
    let (shape_bias, texture_bias) = legacy_bias_from_counts(n_s, n_t)?;
    Ok(LegacyBias { shape_bias, texture_bias, n_correct_shape: n_s, n_correct_texture: n_t, n_neither: n_n })
}

/// Full-space and partial-space decisions for every conflict stimulus in the run.
pub fn conflict_decisions(
    run: &ModelRun,
    manifest: &StimulusManifest,
    mode: PartialMode,
) -> Result<(Vec<ConflictDecision>, Vec<ConflictDecision>), MetricsError> {
    let mut full = Vec::new();
    let mut partial = Vec::new();
    for rec in &run.records {
        let entry = manifest
            .stimulus(&rec.stimulus_id)
            .ok_or_else(|| MetricsError::UnknownStimulus(rec.stimulus_id.clone()))?;
        if entry.kind != StimulusKind::Conflict {
            continue;
        }
        let lookup = |id: &Option<String>| {
            let id = id.as_deref().unwrap_or_default();
            manifest.superclasses().get(id).ok_or_else(|| MetricsError::UnknownSuperclass(id.to_string()))
        };
        let (s, t) = (lookup(&entry.shape_superclass)?, lookup(&entry.texture_superclass)?);
        full.push(full_space_decision(&rec.stimulus_id, &rec.logits, s, t));
        partial.push(partial_space_decision(&rec.stimulus_id, &rec.logits, manifest, s, t, mode));
    }
    Ok((full, partial))
}

/// Fraction of each superclass' cue stimuli whose full-space argmax falls in that superclass.
pub fn classwise_top1_accuracy(
    run: &ModelRun,
    manifest: &StimulusManifest,
    cue: Cue,
) -> Result<BTreeMap<String, f64>, MetricsError> {
    let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for rec in &run.records {
        let entry = manifest
            .stimulus(&rec.stimulus_id)
            .ok_or_else(|| MetricsError::UnknownStimulus(rec.stimulus_id.clone()))?;
        if entry.kind != cue.kind() {
            continue;
        }
        let sc_id = entry.cue_superclass().expect("validated cue entry");
        let sc =
            manifest.superclasses().get(sc_id).ok_or_else(|| MetricsError::UnknownSuperclass(sc_id.to_string()))?;
        let top = argmax_by_index(&rec.logits, 0..rec.logits.len()).expect("non-empty logits");
        let slot = tally.entry(sc_id.to_string()).or_default();
        slot.1 += 1;
        if sc.members.binary_search(&top).is_ok() {
            slot.0 += 1;
        }
    }
    Ok(tally.into_iter().map(|(k, (hit, n))| (k, hit as f64 / n as f64)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluateOptions {
    pub bootstrap_replicates: usize,
    pub ci_level: f64,
    pub seed: u64,
    pub partial_mode: PartialMode,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self { bootstrap_replicates: 10_000, ci_level: 0.95, seed: 0, partial_mode: PartialMode::AllSuperclasses }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueSummary {
    pub sensitivity: f64,
    pub n: usize,
    pub ci: BootstrapCi,
    pub classwise_top1: BTreeMap<String, f64>,
}

/// Every per-model number the benchmark reports. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model_id: String,
    pub metadata: BTreeMap<String, String>,
    pub in_domain_accuracy: Option<f64>,
    pub n_records: usize,
    pub shape: Option<CueSummary>,
    pub texture: Option<CueSummary>,
    pub preference: Option<PreferenceResult>,
    pub legacy_full: Option<LegacyBias>,
    pub legacy_partial: Option<LegacyBias>,
    pub notes: Vec<String>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn cue_summary(
    run: &ModelRun,
    manifest: &StimulusManifest,
    cue: Cue,
    opts: &EvaluateOptions,
) -> Result<Option<CueSummary>, MetricsError> {
    let ranks = cue_ranks(run, manifest, cue)?;
    if ranks.is_empty() {
        return Ok(None);
    }
    let reciprocals: Vec<f64> = ranks.iter().map(|r| r.reciprocal).collect();
    let ci = bootstrap_ci(&reciprocals, opts.ci_level, opts.bootstrap_replicates, derive_seed(opts.seed, cue.as_str()))
        .expect("non-empty reciprocals and valid level");
    Ok(Some(CueSummary {
        sensitivity: mean(reciprocals.iter().copied()),
        n: reciprocals.len(),
        ci,
        classwise_top1: classwise_top1_accuracy(run, manifest, cue)?,
    }))
}

pub fn evaluate_model(
    run: &ModelRun,
    manifest: &StimulusManifest,
    opts: &EvaluateOptions,
) -> Result<EvaluationReport, MetricsError> {
    if run.records.is_empty() {
        return Err(MetricsError::EmptyRun);
    }
    let mut notes = Vec::new();
    let shape = cue_summary(run, manifest, Cue::Shape, opts)?;
    let texture = cue_summary(run, manifest, Cue::Texture, opts)?;
    if shape.is_none() {
        notes.push("shape sensitivity absent: no shape_cue stimuli".to_string());
    }
    if texture.is_none() {
        notes.push("texture sensitivity absent: no texture_cue stimuli".to_string());
    }
    let preference = match (&shape, &texture) {
        (Some(s), Some(t)) => Some(preference_from_values(s.sensitivity, t.sensitivity)?),
        _ => None,
    };
    let (full, partial) = conflict_decisions(run, manifest, opts.partial_mode)?;
    let legacy = |decisions: &[ConflictDecision], label: &str, notes: &mut Vec<String>| {
        if decisions.is_empty() {
            return None;
        }
        match legacy_bias(decisions) {
            Ok(b) => Some(b),
            Err(e) => {
                notes.push(format!("{label} legacy bias absent: {e}"));
                None
            }
        }
    };
    let legacy_full = legacy(&full, "full-space", &mut notes);
    let legacy_partial = legacy(&partial, "partial-space", &mut notes);
    if full.is_empty() {
        notes.push("legacy bias absent: no conflict stimuli".to_string());
    }
    if shape.is_none() && texture.is_none() && full.is_empty() {
        return Err(MetricsError::NoStimuli(Cue::Shape));
    }
    let in_domain_accuracy = run.metadata.get("in_domain_accuracy").and_then(|v| v.parse::<f64>().ok());
    Ok(EvaluationReport {
        model_id: run.model_id.clone(),
        metadata: run.metadata.clone(),
        in_domain_accuracy,
        n_records: run.records.len(),
        shape,
        texture,
        preference,
        legacy_full,
        legacy_partial,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dominance, LogitRecord, StimulusEntry};
    use proptest::prelude::*;

    fn sc(id: &str, members: &[usize]) -> Superclass {
        Superclass { id: id.into(), dominance: Dominance::Shape, members: members.to_vec() }
    }

    /// Brute force: sort all indices by (logit desc, index asc); take the first member's position.
    fn oracle_rank(logits: &[f64], members: &[usize]) -> usize {
        let mut order: Vec<usize> = (0..logits.len()).collect();
        order.sort_by(|&a, &b| logits[b].partial_cmp(&logits[a]).unwrap().then(a.cmp(&b)));
        order.iter().position(|j| members.contains(j)).unwrap() + 1
    }

    #[test]
    fn unique_max_member_ranks_first() {
        let r = superclass_rank("s", &[0.1, 5.0, 0.3], &sc("a", &[1])).unwrap();
        assert_eq!((r.rank, r.reciprocal), (1, 1.0));
    }

    #[test]
    fn second_and_hundredth_place() {
        let mut logits: Vec<f64> = (0..1000).map(|j| -(j as f64)).collect();
        assert_eq!(superclass_rank("s", &logits, &sc("a", &[1])).unwrap().reciprocal, 0.5);
        assert_eq!(superclass_rank("s", &logits, &sc("a", &[99])).unwrap().reciprocal, 0.01);
        logits.reverse();
        assert_eq!(best_member_rank(&logits, &[998, 3]).unwrap(), 2);
    }

    #[test]
    fn ties_break_towards_smaller_index() {
        let logits = [1.0, 2.0, 2.0, 2.0];
        assert_eq!(best_member_rank(&logits, &[1]).unwrap(), 1);
        assert_eq!(best_member_rank(&logits, &[2]).unwrap(), 2);
        assert_eq!(best_member_rank(&logits, &[3, 2]).unwrap(), 2);
        assert_eq!(best_member_rank(&logits, &[0]).unwrap(), 4);
    }

    #[test]
    fn empty_superclass_is_an_error() {
        assert_eq!(superclass_rank("s", &[1.0], &sc("x", &[])).unwrap_err(), MetricsError::EmptySuperclass("x".into()));
    }

    #[test]
    fn preference_examples() {
        let p = preference_from_values(0.4, 0.4).unwrap();
        assert_eq!((p.shape_preference, p.texture_preference), (0.5, 0.5));
        // 0.5630 / (0.5630 + 0.5684)
        let p = preference_from_values(0.5630, 0.5684).unwrap();
        assert!((p.shape_preference - 0.497_613_576_100_406_5).abs() < 1e-15);
        assert!(preference_from_values(0.5, 1e-300).unwrap().shape_preference > 1.0 - 1e-12);
        assert_eq!(preference_from_values(0.0, 0.0).unwrap_err(), MetricsError::Degenerate);
    }

    #[test]
    fn legacy_ratio_conflation() {
        assert_eq!(legacy_bias_from_counts(8, 2).unwrap(), (0.8, 0.2));
        assert_eq!(legacy_bias_from_counts(80, 20).unwrap(), (0.8, 0.2));
        assert_eq!(legacy_bias_from_counts(0, 5).unwrap(), (0.0, 1.0));
        assert_eq!(legacy_bias_from_counts(0, 0).unwrap_err(), MetricsError::NoCorrectDecisions);
    }

    #[test]
    fn all_neither_has_no_legacy_bias() {
        let d = ConflictDecision {
            stimulus_id: "x".into(),
            outcome: DecisionOutcome::Neither,
            space: DecisionSpace::Full,
            predicted: "0".into(),
        };
        assert_eq!(legacy_bias(&[d.clone(), d]).unwrap_err(), MetricsError::NoCorrectDecisions);
    }

    fn rabbit_manifest() -> StimulusManifest {
        let cat = Superclass { id: "cat".into(), dominance: Dominance::Shape, members: vec![1] };
        let dog = Superclass { id: "dog".into(), dominance: Dominance::Texture, members: vec![2] };
        StimulusManifest::new(4, vec![cat, dog], vec![]).unwrap()
    }

    #[test]
    fn restricted_space_turns_rabbit_into_cat() {
        // classes: 0 rabbit, 1 cat, 2 dog, 3 other
        let m = rabbit_manifest();
        let logits = [9.0, 5.0, 3.0, 0.0];
        let cat = m.superclasses().get("cat").unwrap();
        let dog = m.superclasses().get("dog").unwrap();
        let full = full_space_decision("x", &logits, cat, dog);
        let partial = partial_space_decision("x", &logits, &m, cat, dog, PartialMode::AllSuperclasses);
        assert_eq!(full.outcome, DecisionOutcome::Neither);
        assert_eq!(full.predicted, "0");
        assert_eq!(partial.outcome, DecisionOutcome::CorrectShape);
        assert_eq!(partial.predicted, "cat");
    }

    #[test]
    fn candidate_argmax_agrees_across_spaces() {
        let m = rabbit_manifest();
        let logits = [1.0, 0.5, 3.0, 0.0];
        let (cat, dog) = (m.superclasses().get("cat").unwrap(), m.superclasses().get("dog").unwrap());
        assert_eq!(full_space_decision("x", &logits, cat, dog).outcome, DecisionOutcome::CorrectTexture);
        assert_eq!(
            partial_space_decision("x", &logits, &m, cat, dog, PartialMode::ForcedChoice).outcome,
            DecisionOutcome::CorrectTexture
        );
    }

    fn run_fixture() -> (StimulusManifest, ModelRun) {
        let scs = vec![
            Superclass { id: "a".into(), dominance: Dominance::Shape, members: vec![0, 1] },
            Superclass { id: "b".into(), dominance: Dominance::Texture, members: vec![2] },
        ];
        let entry = |id: &str, kind, s: Option<&str>, t: Option<&str>| StimulusEntry {
            id: id.into(),
            kind,
            shape_superclass: s.map(Into::into),
            texture_superclass: t.map(Into::into),
            image_path: String::new(),
            source_image_path: None,
            mask_path: None,
        };
        let m = StimulusManifest::new(
            4,
            scs,
            vec![
                entry("s1", StimulusKind::ShapeCue, Some("a"), None),
                entry("s2", StimulusKind::ShapeCue, Some("a"), None),
                entry("t1", StimulusKind::TextureCue, None, Some("b")),
            ],
        )
        .unwrap();
        let rec = |id: &str, l: [f64; 4]| LogitRecord { stimulus_id: id.into(), logits: l.to_vec() };
        let run = ModelRun::new(
            "m",
            vec![rec("s1", [0.0, 5.0, 1.0, 2.0]), rec("s2", [0.0, 1.0, 3.0, 2.0]), rec("t1", [0.0, 1.0, 3.0, 2.0])],
            &m,
        )
        .unwrap();
        (m, run)
    }

    #[test]
    fn sensitivity_mean_of_reciprocals() {
        let (m, run) = run_fixture();
        let s = cue_sensitivity(&run, &m, Cue::Shape).unwrap();
        // s1 rank 1, s2 best member (class 1, logit 1) behind 3.0 and 2.0 -> rank 3
        assert_eq!(s.n, 2);
        assert!((s.value - (1.0 + 1.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(cue_sensitivity(&run, &m, Cue::Texture).unwrap().value, 1.0);
    }

    #[test]
    fn no_stimuli_of_cue_kind() {
        let (m, mut run) = run_fixture();
        run.records.retain(|r| r.stimulus_id != "t1");
        assert_eq!(cue_sensitivity(&run, &m, Cue::Texture).unwrap_err(), MetricsError::NoStimuli(Cue::Texture));
    }

    #[test]
    fn classwise_tally() {
        let (m, run) = run_fixture();
        let acc = classwise_top1_accuracy(&run, &m, Cue::Shape).unwrap();
        assert_eq!(acc["a"], 0.5);
        assert_eq!(classwise_top1_accuracy(&run, &m, Cue::Texture).unwrap()["b"], 1.0);
    }

    #[test]
    fn shape_only_report_flags_texture_absent() {
        let (m, mut run) = run_fixture();
        run.records.retain(|r| r.stimulus_id != "t1");
        let opts = EvaluateOptions { bootstrap_replicates: 200, ..Default::default() };
        let report = evaluate_model(&run, &m, &opts).unwrap();
        assert!(report.shape.is_some() && report.texture.is_none() && report.preference.is_none());
        assert!(report.notes.iter().any(|n| n.contains("texture sensitivity absent")));
    }

    #[test]
    fn empty_run_is_an_error() {
        let (m, mut run) = run_fixture();
        run.records.clear();
        assert_eq!(evaluate_model(&run, &m, &EvaluateOptions::default()).unwrap_err(), MetricsError::EmptyRun);
    }

    proptest! {
        #[test]
        fn rank_matches_full_sort(
            logits in prop::collection::vec(-3i32..3, 2..40),
            pick in prop::collection::vec(0usize..40, 1..4),
        ) {
            let logits: Vec<f64> = logits.into_iter().map(f64::from).collect();
            let members: Vec<usize> = pick.into_iter().map(|p| p % logits.len()).collect();
            let r = best_member_rank(&logits, &members).unwrap();
            prop_assert_eq!(r, oracle_rank(&logits, &members));
            prop_assert!(r >= 1 && r <= logits.len());
        }

        #[test]
        fn monotone_transform_leaves_rank_unchanged(
            logits in prop::collection::vec(-5.0f64..5.0, 3..30),
            member in 0usize..30,
        ) {
            let member = member % logits.len();
            let moved: Vec<f64> = logits.iter().map(|v| (v * 0.7).exp() + 3.0).collect();
            prop_assert_eq!(
                best_member_rank(&logits, &[member]).unwrap(),
                best_member_rank(&moved, &[member]).unwrap()
            );
        }

        #[test]
        fn preferences_are_complementary(s in 1e-6f64..1.0, t in 1e-6f64..1.0) {
            let p = preference_from_values(s, t).unwrap();
            prop_assert_eq!(p.shape_preference + p.texture_preference, 1.0);
            prop_assert!((0.0..=1.0).contains(&p.shape_preference));
        }

        #[test]
        fn legacy_bias_is_scale_invariant(ns in 0usize..50, nt in 0usize..50, c in 1usize..20) {
            prop_assume!(ns + nt > 0);
            prop_assert_eq!(legacy_bias_from_counts(ns, nt).unwrap(), legacy_bias_from_counts(c * ns, c * nt).unwrap());
        }
    }
}
