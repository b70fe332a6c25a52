//! `generate`: shape and texture cues for every cue entry with a source image and mask.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use refined_bias_core::cue::{
    cue_file_name, curation_report, generate_shape_cue, generate_texture_cue, CueConfig, CueImage, CueKind,
    CurationThresholds,
};
use refined_bias_core::data::{load_mask, load_rgb, StimulusKind};
use refined_bias_core::rng::{derive_seed, sha256_hex};
use refined_bias_core::StimulusManifest;
use serde::Serialize;

use crate::{write_output, Outcome};

pub struct GenerateArgs<'a> {
    pub manifest: &'a StimulusManifest,
    /// Directory relative paths in the manifest resolve against.
    pub root: &'a Path,
    pub config: &'a CueConfig,
    pub seed: u64,
    pub out: &'a Path,
}

#[derive(Serialize)]
struct ProvenanceItem {
    stimulus_id: String,
    kind: CueKind,
    output: String,
    params_hash: String,
    texture_seed: Option<u64>,
    source_sha256: String,
    mask_sha256: String,
}

#[derive(Serialize)]
struct Provenance<'a> {
    seed: u64,
    config: &'a CueConfig,
    items: Vec<ProvenanceItem>,
    failures: Vec<(String, String)>,
}

type Generated = Result<(CueImage, ProvenanceItem, PathBuf)>;

fn file_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

fn generate_one(args: &GenerateArgs, entry: &refined_bias_core::StimulusEntry) -> Result<(CueImage, ProvenanceItem)> {
    let superclass = entry.cue_superclass().expect("cue entries carry their superclass");
    let source = args.root.join(entry.source_image_path.as_deref().expect("filtered"));
    let mask_rel = entry.mask_path.as_deref().context("manifest entry has no mask_path")?;
    let mask_path = args.root.join(mask_rel);
    let image = load_rgb(&source)?;
    let mask = load_mask(&mask_path)?;
    let stem = source.file_stem().and_then(|s| s.to_str()).unwrap_or(&entry.id).to_string();
    let (cue, kind, texture_seed) = match entry.kind {
        StimulusKind::ShapeCue => {
            (generate_shape_cue(&entry.id, &image, &mask, &args.config.shape_for(superclass))?, CueKind::Shape, None)
        }
        _ => {
            let mut params = args.config.texture_for(superclass);
            params.rng_seed = derive_seed(args.seed ^ params.rng_seed, &entry.id);
            let (cue, _) = generate_texture_cue(&entry.id, &image, &mask, &params)?;
            (cue, CueKind::Texture, Some(params.rng_seed))
        }
    };
    let name = cue_file_name(superclass, &stem, kind);
    let item = ProvenanceItem {
        stimulus_id: entry.id.clone(),
        kind,
        output: name,
        params_hash: cue.provenance.params_hash.clone(),
        texture_seed,
        source_sha256: file_hash(&source)?,
        mask_sha256: file_hash(&mask_path)?,
    };
    Ok((cue, item))
}

/// Generate every target cue in parallel; failures are isolated per stimulus.
pub fn run(args: &GenerateArgs) -> Result<Outcome> {
    let targets: Vec<_> = args
        .manifest
        .stimuli()
        .iter()
        .filter(|s| s.kind != StimulusKind::Conflict && s.source_image_path.is_some())
        .collect();
    std::fs::create_dir_all(args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut results: Vec<(String, Generated)> = targets
        .par_iter()
        .map(|entry| {
            let r = generate_one(args, entry).and_then(|(cue, item)| {
                let path = args.out.join(&item.output);
                cue.save_png(&path).with_context(|| format!("writing {}", path.display()))?;
                Ok((cue, item, path))
            });
            (entry.id.clone(), r)
        })
        .collect();
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut outcome = Outcome::default();
    let mut items = Vec::new();
    let mut cues = Vec::new();
    for (id, r) in results {
        match r {
            Ok((cue, item, path)) => {
                outcome.written.push(path);
                items.push(item);
                cues.push(cue);
            }
            Err(e) => outcome.fail(id, format!("{e:#}")),
        }
    }
    let provenance = Provenance { seed: args.seed, config: args.config, items, failures: outcome.failures.clone() };
    let mut text = serde_json::to_string_pretty(&provenance)?;
    text.push('\n');
    write_output(&mut outcome, args.out, "provenance.json", &text)?;
    let curation = curation_report(&cues, &CurationThresholds::default());
    let mut text = serde_json::to_string_pretty(&curation)?;
    text.push('\n');
    write_output(&mut outcome, args.out, "curation.json", &text)?;
    Ok(outcome)
}
