//! Rating matrices for agreement analysis, built from completed sessions.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::metrics::Cue;
use crate::rng::{derive_seed, stream_rng};
use crate::stats::RatingsMatrix;

use super::{SurveyError, SurveyStore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportMatrix {
    pub dataset: String,
    pub cue_type: Cue,
    pub ratings: RatingsMatrix,
    pub n_raters: u64,
    /// Human-readable record of items dropped or down-sampled.
    pub adjustments: Vec<String>,
}

/// One matrix per `(dataset, cue_type)`, items = stimuli, categories = candidate superclasses.
///
/// Items answered fewer than twice are dropped. Items answered more often
/// than the least-answered remaining item keep a seeded random subset of
/// that many answers, so every row has the same rater count.
pub fn export_responses(store: &SurveyStore, seed: u64) -> Result<Vec<ExportMatrix>, SurveyError> {
    type Key = (String, Cue);
    let mut answers: BTreeMap<Key, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    let mut categories: BTreeMap<Key, BTreeSet<String>> = BTreeMap::new();
    let mut any_completed = false;
    for (session, responses) in store.snapshot() {
        if !session.completed {
            continue;
        }
        any_completed = true;
        for r in responses {
            let task = &session.task_sequence[r.index];
            let key = (session.dataset.clone(), task.cue_type);
            categories.entry(key.clone()).or_default().extend(task.candidate_classes.iter().cloned());
            answers.entry(key).or_default().entry(task.stimulus_id.clone()).or_default().push(r.chosen);
        }
    }
    if !any_completed {
        return Err(SurveyError::NoData);
    }

    let mut out = Vec::new();
    for (key, items) in answers {
        let cats: Vec<String> = categories[&key].iter().cloned().collect();
        let mut adjustments = Vec::new();
        let kept: BTreeMap<String, Vec<String>> = items
            .into_iter()
            .filter(|(item, a)| {
                if a.len() < 2 {
                    adjustments.push(format!("dropped {item}: {} response(s)", a.len()));
                }
                a.len() >= 2
            })
            .collect();
        if kept.is_empty() {
            log::warn!("{}/{}: no item has two or more responses; skipped", key.0, key.1);
            continue;
        }
        let common = kept.values().map(Vec::len).min().expect("non-empty");
        let mut counts = Vec::with_capacity(kept.len());
        for (item, a) in &kept {
            let chosen: Vec<&String> = if a.len() > common {
                adjustments.push(format!("down-sampled {item}: {} -> {common}", a.len()));
                let mut rng = stream_rng(derive_seed(seed, &format!("{}/{}/{item}", key.0, key.1)), 0);
                a.choose_multiple(&mut rng, common).collect()
            } else {
                a.iter().collect()
            };
            counts.push(cats.iter().map(|c| chosen.iter().filter(|x| **x == c).count() as u64).collect());
        }
        for note in &adjustments {
            log::info!("{}/{}: {note}", key.0, key.1);
        }
        out.push(ExportMatrix {
            dataset: key.0,
            cue_type: key.1,
            ratings: RatingsMatrix { item_ids: kept.keys().cloned().collect(), categories: cats, counts },
            n_raters: common as u64,
            adjustments,
        });
    }
    if out.is_empty() {
        return Err(SurveyError::NoData);
    }
    Ok(out)
}
