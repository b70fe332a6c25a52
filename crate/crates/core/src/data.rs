//! Shared domain types: superclass maps, stimulus manifests, logit dumps.
//!
//! Manifest files are JSON:
//!
//! ```json
//! {
//!   "label_space_size": 1000,
//!   "superclasses": [{"id": "clock", "dominance": "shape", "members": [409, 530]}],
//!   "stimuli": [{"id": "clock/0001/shape", "kind": "shape_cue",
//!                "shape_superclass": "clock", "image_path": "cues/clock__0001__shape.png"}]
//! }
//! ```
//!
//! Logit dumps are CSV with header `stimulus_id,l0,...,l{K-1}`, one row per stimulus.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::Mask;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("validation error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Validation { line: Option<usize>, message: String },
    #[error("dimension error at line {line}: expected {expected} columns, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("unknown stimulus {id:?} at line {line}")]
    UnknownStimulus { line: usize, id: String },
    #[error("image error on {path}: {message}")]
    Image { path: PathBuf, message: String },
}

impl DataError {
    fn validation(message: impl Into<String>) -> Self {
        DataError::Validation { line: None, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    Shape,
    Texture,
}

/// A benchmark category aggregating one or more base-model classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Superclass {
    pub id: String,
    pub dominance: Dominance,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuperclassMap {
    entries: Vec<Superclass>,
    index: HashMap<String, usize>,
}

impl SuperclassMap {
    /// Validates disjointness, non-emptiness, unique ids and `members < label_space_size`.
    pub fn new(entries: Vec<Superclass>, label_space_size: usize) -> Result<Self, DataError> {
        let mut index = HashMap::new();
        let mut owner: HashMap<usize, &str> = HashMap::new();
        for (i, sc) in entries.iter().enumerate() {
            if sc.id.is_empty() {
                return Err(DataError::validation("superclass with empty id"));
            }
            if index.insert(sc.id.clone(), i).is_some() {
                return Err(DataError::validation(format!("duplicate superclass {:?}", sc.id)));
            }
            if sc.members.is_empty() {
                return Err(DataError::validation(format!("superclass {:?} has no members", sc.id)));
            }
            for &m in &sc.members {
                if m >= label_space_size {
                    return Err(DataError::validation(format!(
                        "superclass {:?} member {m} outside label space of size {label_space_size}",
                        sc.id
                    )));
                }
                if let Some(prev) = owner.insert(m, &sc.id) {
                    if prev != sc.id {
                        return Err(DataError::validation(format!(
                            "class {m} belongs to both {prev:?} and {:?}",
                            sc.id
                        )));
                    }
                }
            }
        }
        let mut entries = entries;
        for sc in &mut entries {
            sc.members.sort_unstable();
            sc.members.dedup();
        }
        Ok(Self { entries, index })
    }

    pub fn get(&self, id: &str) -> Option<&Superclass> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Superclass> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Superclass ids of one dominance group, sorted.
    pub fn ids_with_dominance(&self, dominance: Dominance) -> Vec<String> {
        let mut ids: Vec<String> =
            self.entries.iter().filter(|sc| sc.dominance == dominance).map(|sc| sc.id.clone()).collect();
        ids.sort();
        ids
    }

    /// The superclass owning base class `class`, if any.
    pub fn owner_of(&self, class: usize) -> Option<&Superclass> {
        self.entries.iter().find(|sc| sc.members.binary_search(&class).is_ok())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusKind {
    ShapeCue,
    TextureCue,
    Conflict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusEntry {
    pub id: String,
    pub kind: StimulusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_superclass: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texture_superclass: Option<String>,
    pub image_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_image_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<String>,
}

impl StimulusEntry {
    /// The superclass a cue of this kind is labelled with (`None` for conflicts).
    pub fn cue_superclass(&self) -> Option<&str> {
        match self.kind {
            StimulusKind::ShapeCue => self.shape_superclass.as_deref(),
            StimulusKind::TextureCue => self.texture_superclass.as_deref(),
            StimulusKind::Conflict => None,
        }
    }

    fn check(&self, superclasses: &SuperclassMap) -> Result<(), String> {
        let (shape, texture) = (&self.shape_superclass, &self.texture_superclass);
        match self.kind {
            StimulusKind::ShapeCue if shape.is_none() || texture.is_some() => {
                return Err("shape_cue needs shape_superclass and no texture_superclass".into())
            }
            StimulusKind::TextureCue if texture.is_none() || shape.is_some() => {
                return Err("texture_cue needs texture_superclass and no shape_superclass".into())
            }
            StimulusKind::Conflict => match (shape, texture) {
                (Some(s), Some(t)) if s != t => {}
                (Some(_), Some(_)) => return Err("conflict superclasses must differ".into()),
                _ => return Err("conflict needs both superclasses".into()),
            },
            _ => {}
        }
        for sc in [shape, texture].into_iter().flatten() {
            if !superclasses.contains(sc) {
                return Err(format!("unknown superclass {sc:?}"));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    label_space_size: usize,
    superclasses: Vec<Superclass>,
    stimuli: Vec<StimulusEntry>,
}

/// Validated catalogue of stimuli together with the label space they are scored in.
#[derive(Debug, Clone)]
pub struct StimulusManifest {
    label_space_size: usize,
    superclasses: SuperclassMap,
    stimuli: Vec<StimulusEntry>,
    by_id: HashMap<String, usize>,
}

impl StimulusManifest {
    pub fn new(
        label_space_size: usize,
        superclasses: Vec<Superclass>,
        stimuli: Vec<StimulusEntry>,
    ) -> Result<Self, DataError> {
        if label_space_size == 0 {
            return Err(DataError::validation("label_space_size must be positive"));
        }
        let superclasses = SuperclassMap::new(superclasses, label_space_size)?;
        let mut by_id = HashMap::with_capacity(stimuli.len());
        for (i, entry) in stimuli.iter().enumerate() {
            entry
                .check(&superclasses)
                .map_err(|reason| DataError::validation(format!("stimulus {:?}: {reason}", entry.id)))?;
            if by_id.insert(entry.id.clone(), i).is_some() {
                return Err(DataError::validation(format!("duplicate stimulus id {:?}", entry.id)));
            }
        }
        Ok(Self { label_space_size, superclasses, stimuli, by_id })
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        let file: ManifestFile = serde_json::from_str(text)
            .map_err(|e| DataError::Parse { line: Some(e.line()), message: e.to_string() })?;
        Self::new(file.label_space_size, file.superclasses, file.stimuli)
    }

    pub fn to_json(&self) -> String {
        let file = ManifestFile {
            label_space_size: self.label_space_size,
            superclasses: self.superclasses.iter().cloned().collect(),
            stimuli: self.stimuli.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn label_space_size(&self) -> usize {
        self.label_space_size
    }

    pub fn superclasses(&self) -> &SuperclassMap {
        &self.superclasses
    }

    pub fn stimuli(&self) -> &[StimulusEntry] {
        &self.stimuli
    }

    pub fn stimulus(&self, id: &str) -> Option<&StimulusEntry> {
        self.by_id.get(id).map(|&i| &self.stimuli[i])
    }

    /// Sorted union of all superclass members: the partial decision space.
    pub fn candidate_classes(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.superclasses.iter().flat_map(|s| s.members.iter().copied()).collect();
        all.sort_unstable();
        all
    }
}

pub fn load_manifest(path: &Path) -> Result<StimulusManifest, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io { path: path.into(), source })?;
    StimulusManifest::from_json(&text)
}

pub fn save_manifest(manifest: &StimulusManifest, path: &Path) -> Result<(), DataError> {
    fs::write(path, manifest.to_json()).map_err(|source| DataError::Io { path: path.into(), source })
}

/// One model's raw scores over its full label space for one stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitRecord {
    pub stimulus_id: String,
    pub logits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelRun {
    pub model_id: String,
    pub records: Vec<LogitRecord>,
    pub metadata: BTreeMap<String, String>,
}

impl ModelRun {
    /// Validates record width, finiteness, uniqueness and manifest membership.
    pub fn new(
        model_id: impl Into<String>,
        records: Vec<LogitRecord>,
        manifest: &StimulusManifest,
    ) -> Result<Self, DataError> {
        let k = manifest.label_space_size();
        let mut seen = HashSet::new();
        for (i, r) in records.iter().enumerate() {
            let line = i + 2;
            if r.logits.len() != k {
                return Err(DataError::Dimension { line, expected: k + 1, found: r.logits.len() + 1 });
            }
            if let Some(j) = r.logits.iter().position(|v| !v.is_finite()) {
                return Err(DataError::Validation {
                    line: Some(line),
                    message: format!("non-finite logit l{j} for {:?}", r.stimulus_id),
                });
            }
            if manifest.stimulus(&r.stimulus_id).is_none() {
                return Err(DataError::UnknownStimulus { line, id: r.stimulus_id.clone() });
            }
            if !seen.insert(r.stimulus_id.as_str()) {
                return Err(DataError::Validation {
                    line: Some(line),
                    message: format!("duplicate stimulus {:?}", r.stimulus_id),
                });
            }
        }
        Ok(Self { model_id: model_id.into(), records, metadata: BTreeMap::new() })
    }
}

/// Parse a logits CSV. Line numbers in errors count the header as line 1.
pub fn parse_logits<R: Read>(reader: R, model_id: &str, manifest: &StimulusManifest) -> Result<ModelRun, DataError> {
    let k = manifest.label_space_size();
    let mut csv = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header = csv.headers().map_err(|e| DataError::Parse { line: Some(1), message: e.to_string() })?.clone();
    if header.len() != k + 1 {
        return Err(DataError::Dimension { line: 1, expected: k + 1, found: header.len() });
    }
    if header.get(0) != Some("stimulus_id") {
        return Err(DataError::Parse { line: Some(1), message: "first column must be stimulus_id".into() });
    }
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in csv.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| DataError::Parse { line: Some(line), message: e.to_string() })?;
        if row.len() != k + 1 {
            return Err(DataError::Dimension { line, expected: k + 1, found: row.len() });
        }
        let id = row[0].trim().to_string();
        let mut logits = Vec::with_capacity(k);
        for (j, field) in row.iter().skip(1).enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| DataError::Parse {
                line: Some(line),
                message: format!("column l{j}: {field:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(DataError::Validation {
                    line: Some(line),
                    message: format!("non-finite logit l{j} ({field}) for {id:?}"),
                });
            }
            logits.push(v);
        }
        if manifest.stimulus(&id).is_none() {
            return Err(DataError::UnknownStimulus { line, id });
        }
        if !seen.insert(id.clone()) {
            return Err(DataError::Validation { line: Some(line), message: format!("duplicate stimulus {id:?}") });
        }
        records.push(LogitRecord { stimulus_id: id, logits });
    }
    Ok(ModelRun { model_id: model_id.to_string(), records, metadata: BTreeMap::new() })
}

/// Load a logits CSV; the model id defaults to the file stem.
pub fn load_logits(path: &Path, manifest: &StimulusManifest) -> Result<ModelRun, DataError> {
    let file = fs::File::open(path).map_err(|source| DataError::Io { path: path.into(), source })?;
    let model_id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("model").to_string();
    parse_logits(std::io::BufReader::new(file), &model_id, manifest)
}

/// Write a logits CSV in the canonical layout.
pub fn write_logits<W: std::io::Write>(run: &ModelRun, k: usize, out: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| DataError::Parse { line: None, message: e.to_string() };
    let mut header = vec!["stimulus_id".to_string()];
    header.extend((0..k).map(|j| format!("l{j}")));
    w.write_record(&header).map_err(to_err)?;
    for r in &run.records {
        let mut row = vec![r.stimulus_id.clone()];
        row.extend(r.logits.iter().map(|v| format!("{v}")));
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(|source| DataError::Io { path: PathBuf::from("<writer>"), source })
}

pub fn load_mask(path: &Path) -> Result<Mask, DataError> {
    let img = image::open(path).map_err(|e| DataError::Image { path: path.into(), message: e.to_string() })?;
    Ok(Mask::from_gray(&img.to_luma8()))
}

pub fn load_rgb(path: &Path) -> Result<image::RgbImage, DataError> {
    let img = image::open(path).map_err(|e| DataError::Image { path: path.into(), message: e.to_string() })?;
    Ok(img.to_rgb8())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(id: &str, d: Dominance, m: &[usize]) -> Superclass {
        Superclass { id: id.into(), dominance: d, members: m.to_vec() }
    }

    fn shape_entry(id: &str, sc: &str) -> StimulusEntry {
        StimulusEntry {
            id: id.into(),
            kind: StimulusKind::ShapeCue,
            shape_superclass: Some(sc.into()),
            texture_superclass: None,
            image_path: format!("{id}.png"),
            source_image_path: None,
            mask_path: None,
        }
    }

    fn small_manifest() -> StimulusManifest {
        StimulusManifest::new(
            5,
            vec![sc("clock", Dominance::Shape, &[0, 1]), sc("honeycomb", Dominance::Texture, &[3])],
            vec![shape_entry("a", "clock"), shape_entry("b", "clock"), shape_entry("c", "clock")],
        )
        .unwrap()
    }

    #[test]
    fn minimal_manifest_round_trips() {
        let json = r#"{"label_space_size": 1000,
            "superclasses": [{"id": "clock", "dominance": "shape", "members": [409]}],
            "stimuli": [{"id": "s1", "kind": "shape_cue", "shape_superclass": "clock", "image_path": "s1.png"}]}"#;
        let m = StimulusManifest::from_json(json).unwrap();
        assert_eq!(m.stimuli().len(), 1);
        let again = StimulusManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(again.to_json(), m.to_json());
    }

    #[test]
    fn unknown_superclass_is_named() {
        let err = StimulusManifest::new(10, vec![sc("clock", Dominance::Shape, &[1])], vec![shape_entry("s", "zebra")])
            .unwrap_err();
        assert!(matches!(err, DataError::Validation { .. }));
        assert!(err.to_string().contains("zebra"));
    }

    #[test]
    fn six_thousand_entries_accepted() {
        let mut scs = Vec::new();
        let mut stimuli = Vec::new();
        for c in 0..20 {
            let (d, kind) = if c < 10 {
                (Dominance::Shape, StimulusKind::ShapeCue)
            } else {
                (Dominance::Texture, StimulusKind::TextureCue)
            };
            let id = format!("class{c:02}");
            scs.push(sc(&id, d, &[c * 3, c * 3 + 1]));
            for i in 0..300 {
                let mut e = shape_entry(&format!("{id}/{i:04}/v"), &id);
                if kind == StimulusKind::TextureCue {
                    e.kind = kind;
                    e.texture_superclass = e.shape_superclass.take();
                }
                stimuli.push(e);
            }
        }
        let m = StimulusManifest::new(1000, scs, stimuli).unwrap();
        assert_eq!(m.stimuli().len(), 6000);
    }

    #[test]
    fn overlapping_members_rejected() {
        let err = SuperclassMap::new(vec![sc("a", Dominance::Shape, &[1, 2]), sc("b", Dominance::Texture, &[2])], 5)
            .unwrap_err();
        assert!(err.to_string().contains("class 2"));
    }

    #[test]
    fn member_outside_label_space_rejected() {
        assert!(SuperclassMap::new(vec![sc("a", Dominance::Shape, &[5])], 5).is_err());
    }

    #[test]
    fn conflict_needs_distinct_superclasses() {
        let mut e = shape_entry("x", "a");
        e.kind = StimulusKind::Conflict;
        e.texture_superclass = Some("a".into());
        let err = StimulusManifest::new(5, vec![sc("a", Dominance::Shape, &[1])], vec![e]).unwrap_err();
        assert!(err.to_string().contains("differ"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = StimulusManifest::new(
            5,
            vec![sc("a", Dominance::Shape, &[1])],
            vec![shape_entry("x", "a"), shape_entry("x", "a")],
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn three_row_logits_file() {
        let m = small_manifest();
        let csv = "stimulus_id,l0,l1,l2,l3,l4\na,1,2,3,4,5\nb,0.5,0,0,0,0\nc,-1,-2,-3,-4,-5e-1\n";
        let run = parse_logits(csv.as_bytes(), "m", &m).unwrap();
        assert_eq!(run.records.len(), 3);
        assert_eq!(run.records[2].logits[4], -0.5);
    }

    #[test]
    fn nan_logit_cites_row() {
        let m = small_manifest();
        let csv = "stimulus_id,l0,l1,l2,l3,l4\na,1,2,3,4,5\nb,1,NaN,3,4,5\n";
        let err = parse_logits(csv.as_bytes(), "m", &m).unwrap_err();
        match err {
            DataError::Validation { line, .. } => assert_eq!(line, Some(3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_row_is_dimension_error() {
        let m = small_manifest();
        let csv = "stimulus_id,l0,l1,l2,l3,l4\na,1,2,3,4\n";
        let err = parse_logits(csv.as_bytes(), "m", &m).unwrap_err();
        assert!(matches!(err, DataError::Dimension { line: 2, expected: 6, found: 5 }));
    }

    #[test]
    fn dimension_error_for_k_1000() {
        let m =
            StimulusManifest::new(1000, vec![sc("a", Dominance::Shape, &[1])], vec![shape_entry("x", "a")]).unwrap();
        let mut csv = String::from("stimulus_id");
        for j in 0..1000 {
            csv.push_str(&format!(",l{j}"));
        }
        csv.push_str("\nx");
        for _ in 0..999 {
            csv.push_str(",0.1");
        }
        csv.push('\n');
        let err = parse_logits(csv.as_bytes(), "m", &m).unwrap_err();
        assert!(matches!(err, DataError::Dimension { expected: 1001, found: 1000, .. }));
    }

    #[test]
    fn unknown_stimulus_rejected() {
        let m = small_manifest();
        let csv = "stimulus_id,l0,l1,l2,l3,l4\nzz,1,2,3,4,5\n";
        assert!(matches!(
            parse_logits(csv.as_bytes(), "m", &m).unwrap_err(),
            DataError::UnknownStimulus { line: 2, .. }
        ));
    }

    #[test]
    fn write_then_parse_logits() {
        let m = small_manifest();
        let run = ModelRun::new(
            "m",
            vec![LogitRecord { stimulus_id: "a".into(), logits: vec![0.1, -2.5, 3.0, 1e-9, 7.0] }],
            &m,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_logits(&run, 5, &mut buf).unwrap();
        let back = parse_logits(buf.as_slice(), "m", &m).unwrap();
        assert_eq!(back.records, run.records);
    }
}
