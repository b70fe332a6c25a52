use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::data::{Dominance, StimulusManifest};
use crate::metrics::Cue;
use crate::rng::{derive_seed, stream_rng};

use super::{SectionOrder, SurveyError, SurveySession, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub dataset: String,
    pub seed: u64,
    pub order: SectionOrder,
    /// Pink noise precedes every `noise_every`-th task; 0 disables it.
    pub noise_every: usize,
    pub tasks_per_section: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            dataset: "refined_bias".into(),
            seed: 0,
            order: SectionOrder::ShapeFirst,
            noise_every: 5,
            tasks_per_section: 50,
        }
    }
}

fn dominance(cue: Cue) -> Dominance {
    match cue {
        Cue::Shape => Dominance::Shape,
        Cue::Texture => Dominance::Texture,
    }
}

/// Cue stimuli of each superclass in the section's dominance group, sorted by id.
fn section_pool(manifest: &StimulusManifest, cue: Cue) -> BTreeMap<String, Vec<String>> {
    let mut pool: BTreeMap<String, Vec<String>> =
        manifest.superclasses().ids_with_dominance(dominance(cue)).into_iter().map(|id| (id, Vec::new())).collect();
    for s in manifest.stimuli() {
        if s.kind != cue.kind() {
            continue;
        }
        if let Some(list) = s.cue_superclass().and_then(|sc| pool.get_mut(sc)) {
            list.push(s.id.clone());
        }
    }
    for list in pool.values_mut() {
        list.sort();
    }
    pool
}

fn random_token() -> String {
    format!("{:032x}", rand::random::<u128>())
}

/// Build a seeded session: each section samples the same number of stimuli
/// from every superclass in its dominance group, without repeats, shuffled.
pub fn create_session(manifest: &StimulusManifest, config: &SessionConfig) -> Result<SurveySession, SurveyError> {
    if config.tasks_per_section == 0 {
        return Err(SurveyError::InvalidConfig("tasks_per_section must be positive".into()));
    }
    let mut tasks = Vec::with_capacity(2 * config.tasks_per_section);
    for cue in config.order.sections() {
        let pool = section_pool(manifest, cue);
        if pool.is_empty() {
            return Err(SurveyError::InvalidConfig(format!("no {cue}-dominant superclasses")));
        }
        if !config.tasks_per_section.is_multiple_of(pool.len()) {
            return Err(SurveyError::InvalidConfig(format!(
                "{} tasks cannot be split evenly over {} {cue} superclasses",
                config.tasks_per_section,
                pool.len()
            )));
        }
        let per_class = config.tasks_per_section / pool.len();
        let candidates: Vec<String> = pool.keys().cloned().collect();
        let mut rng = stream_rng(derive_seed(config.seed, &format!("section:{cue}")), 0);
        let mut picked = Vec::with_capacity(config.tasks_per_section);
        for (sc, stimuli) in &pool {
            if stimuli.len() < per_class {
                return Err(SurveyError::InsufficientStimuli {
                    superclass: sc.clone(),
                    cue,
                    available: stimuli.len(),
                    needed: per_class,
                });
            }
            picked.extend(stimuli.choose_multiple(&mut rng, per_class).cloned());
        }
        picked.shuffle(&mut rng);
        for stimulus_id in picked {
            let index = tasks.len();
            tasks.push(Task {
                index,
                stimulus_id,
                cue_type: cue,
                candidate_classes: candidates.clone(),
                noise_before: config.noise_every > 0 && index > 0 && index % config.noise_every == 0,
            });
        }
    }
    Ok(SurveySession {
        session_id: random_token(),
        dataset: config.dataset.clone(),
        seed: config.seed,
        order: config.order,
        task_sequence: tasks,
        cursor: 0,
        created_at: chrono::Utc::now(),
        completed: false,
    })
}

pub const FAMILIARIZATION_PER_CLASS: usize = 3;

/// Three seeded original (source) images per superclass of the section,
/// offered before the section's first task.
pub fn familiarization_set(
    session: &SurveySession,
    manifest: &StimulusManifest,
    section: Cue,
) -> Result<BTreeMap<String, Vec<String>>, SurveyError> {
    if session.cursor > session.section_start(section) {
        return Err(SurveyError::SectionStarted(section));
    }
    let mut sources: BTreeMap<String, BTreeSet<String>> = manifest
        .superclasses()
        .ids_with_dominance(dominance(section))
        .into_iter()
        .map(|id| (id, BTreeSet::new()))
        .collect();
    for s in manifest.stimuli() {
        let (Some(src), Some(sc)) = (&s.source_image_path, s.cue_superclass()) else { continue };
        if let Some(set) = sources.get_mut(sc) {
            set.insert(src.clone());
        }
    }
    let mut rng = stream_rng(derive_seed(session.seed, &format!("familiarization:{section}")), 0);
    let mut out = BTreeMap::new();
    for (sc, set) in sources {
        if set.len() < FAMILIARIZATION_PER_CLASS {
            return Err(SurveyError::InsufficientSources {
                superclass: sc,
                available: set.len(),
                needed: FAMILIARIZATION_PER_CLASS,
            });
        }
        let all: Vec<String> = set.into_iter().collect();
        let mut chosen: Vec<String> = all.choose_multiple(&mut rng, FAMILIARIZATION_PER_CLASS).cloned().collect();
        chosen.sort();
        out.insert(sc, chosen);
    }
    Ok(out)
}
