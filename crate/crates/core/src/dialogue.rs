//! Two-party dialogues, speaker roles and per-role complexity series.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::complexity::{
    isc_score, syntactic_complexity, ComplexityConfig, ComplexityRecord, Role,
};
use crate::deptree::{
    parse_conllu, DepTree, ParseError, ValidationReport, META_DIALOGUE_ID, META_SPEAKER,
    META_UTTERANCE_ID,
};
use crate::treemetrics::{MetricsOptions, TreeMetrics};

#[derive(Clone, Debug, PartialEq)]
pub struct Utterance {
    pub utterance_id: String,
    pub speaker: String,
    pub tree: DepTree,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dialogue {
    id: String,
    utterances: Vec<Utterance>,
    initiator: String,
}

impl Dialogue {
    /// Utterances must be in transcript order and come from exactly two
    /// speakers; the first speaker becomes the initiator.
    pub fn new(id: impl Into<String>, utterances: Vec<Utterance>) -> Result<Self, LoadError> {
        let id = id.into();
        let speakers: HashSet<&str> = utterances.iter().map(|u| u.speaker.as_str()).collect();
        if speakers.len() != 2 {
            return Err(LoadError::SpeakerCount {
                dialogue_id: id,
                found: speakers.len(),
            });
        }
        let initiator = utterances[0].speaker.clone();
        Ok(Dialogue {
            id,
            utterances,
            initiator,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn initiator(&self) -> &str {
        &self.initiator
    }

    pub fn follower(&self) -> &str {
        self.utterances
            .iter()
            .map(|u| u.speaker.as_str())
            .find(|s| *s != self.initiator)
            .expect("two-speaker dialogue")
    }

    pub fn role_of(&self, speaker: &str) -> Option<Role> {
        if speaker == self.initiator {
            Some(Role::Initiator)
        } else if speaker == self.follower() {
            Some(Role::Follower)
        } else {
            None
        }
    }
}

/// The first speaker initiates; the other follows for the whole dialogue.
pub fn assign_roles(dialogue: &Dialogue) -> BTreeMap<String, Role> {
    BTreeMap::from([
        (dialogue.initiator().to_owned(), Role::Initiator),
        (dialogue.follower().to_owned(), Role::Follower),
    ])
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub dialogues: Vec<Dialogue>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, dialogues: Vec<Dialogue>) -> Result<Self, LoadError> {
        let mut seen = HashSet::new();
        for d in &dialogues {
            if !seen.insert(d.id()) {
                return Err(LoadError::DuplicateDialogue(d.id().to_owned()));
            }
        }
        Ok(Corpus {
            name: name.into(),
            dialogues,
        })
    }

    pub fn utterance_count(&self) -> usize {
        self.dialogues.iter().map(|d| d.utterances.len()).sum()
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{document}: {source}")]
    Parse {
        document: String,
        #[source]
        source: ParseError,
    },
    #[error("{document}: sentence {sentence}: {report}")]
    InvalidTree {
        document: String,
        sentence: usize,
        report: ValidationReport,
    },
    #[error("{document}: sentence {sentence}: missing {field} (no comment and no manifest row)")]
    MissingMetadata {
        document: String,
        sentence: usize,
        field: &'static str,
    },
    #[error("duplicate utterance {utterance_id} in dialogue {dialogue_id}")]
    DuplicateUtterance {
        dialogue_id: String,
        utterance_id: String,
    },
    #[error("dialogue {dialogue_id} has {found} speakers, expected 2")]
    SpeakerCount { dialogue_id: String, found: usize },
    #[error("duplicate dialogue id {0}")]
    DuplicateDialogue(String),
    #[error("manifest: {0}")]
    Manifest(String),
}

/// How dialogues are laid out across input documents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Layout {
    /// Dialogue ids come from `# dialogue_id` comments.
    #[default]
    Concatenated,
    /// Each document is one dialogue; its name is the fallback dialogue id.
    PerFile,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    pub lenient: bool,
    pub layout: Layout,
}

/// A named CoNLL-U input.
#[derive(Clone, Debug)]
pub struct Document {
    pub name: String,
    pub text: String,
}

impl Document {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            name: name.into(),
            text: text.into(),
        }
    }
}

/// Speaker assignments keyed by `(dialogue_id, utterance_id)`.
#[derive(Clone, Debug, Default)]
pub struct Manifest {
    speakers: HashMap<(String, String), String>,
}

impl Manifest {
    /// Reads CSV with header `dialogue_id,utterance_id,speaker`.
    pub fn from_csv(text: &str) -> Result<Self, LoadError> {
        #[derive(serde::Deserialize)]
        struct Row {
            dialogue_id: String,
            utterance_id: String,
            speaker: String,
        }
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut speakers = HashMap::new();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| LoadError::Manifest(e.to_string()))?;
            let key = (row.dialogue_id, row.utterance_id);
            if speakers.insert(key.clone(), row.speaker).is_some() {
                return Err(LoadError::Manifest(format!(
                    "duplicate row for dialogue {} utterance {}",
                    key.0, key.1
                )));
            }
        }
        Ok(Manifest { speakers })
    }

    pub fn insert(&mut self, dialogue_id: &str, utterance_id: &str, speaker: &str) {
        self.speakers.insert(
            (dialogue_id.to_owned(), utterance_id.to_owned()),
            speaker.to_owned(),
        );
    }

    fn speaker(&self, dialogue_id: &str, utterance_id: &str) -> Option<&str> {
        self.speakers
            .get(&(dialogue_id.to_owned(), utterance_id.to_owned()))
            .map(String::as_str)
    }
}

#[derive(Clone, Debug, Default)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    /// Sentences and dialogues dropped in lenient mode.
    pub warnings: Vec<String>,
}

struct Pending {
    order: usize,
    utterance: Utterance,
}

/// Assembles dialogues from CoNLL-U documents.
///
/// Utterances are ordered by `utterance_id` when every id in a dialogue is
/// an integer, and by input order otherwise. A manifest row overrides the
/// speaker comment of the same utterance.
pub fn load_corpus(
    name: &str,
    documents: &[Document],
    manifest: Option<&Manifest>,
    options: LoadOptions,
) -> Result<LoadedCorpus, LoadError> {
    let mut warnings = Vec::new();
    let mut grouped: BTreeMap<String, Vec<Pending>> = BTreeMap::new();
    let mut order = 0usize;

    for doc in documents {
        let trees = parse_conllu(&doc.text).map_err(|source| LoadError::Parse {
            document: doc.name.clone(),
            source,
        })?;

        for (idx, tree) in trees.into_iter().enumerate() {
            let sentence = idx + 1;
            if let Err(report) = tree.validate() {
                if options.lenient {
                    warnings.push(format!(
                        "{}: sentence {sentence}: dropped invalid tree: {report}",
                        doc.name
                    ));
                    continue;
                }
                return Err(LoadError::InvalidTree {
                    document: doc.name.clone(),
                    sentence,
                    report,
                });
            }

            let missing = |field| LoadError::MissingMetadata {
                document: doc.name.clone(),
                sentence,
                field,
            };
            let dialogue_id = match (tree.meta_value(META_DIALOGUE_ID), options.layout) {
                (Some(id), _) => id.to_owned(),
                (None, Layout::PerFile) => doc.name.clone(),
                (None, Layout::Concatenated) => return Err(missing(META_DIALOGUE_ID)),
            };
            let utterance_id = tree
                .meta_value(META_UTTERANCE_ID)
                .or_else(|| tree.meta_value("sent_id"))
                .map(str::to_owned)
                .unwrap_or_else(|| sentence.to_string());
            let speaker = manifest
                .and_then(|m| m.speaker(&dialogue_id, &utterance_id))
                .or_else(|| tree.meta_value(META_SPEAKER))
                .ok_or_else(|| missing(META_SPEAKER))?
                .to_owned();

            grouped.entry(dialogue_id).or_default().push(Pending {
                order,
                utterance: Utterance {
                    utterance_id,
                    speaker,
                    tree,
                },
            });
            order += 1;
        }
    }

    let mut dialogues = Vec::with_capacity(grouped.len());
    for (dialogue_id, mut pending) in grouped {
        let mut ids = HashSet::new();
        for p in &pending {
            if !ids.insert(p.utterance.utterance_id.as_str()) {
                return Err(LoadError::DuplicateUtterance {
                    dialogue_id,
                    utterance_id: p.utterance.utterance_id.clone(),
                });
            }
        }

        let numeric: Option<Vec<i64>> = pending
            .iter()
            .map(|p| p.utterance.utterance_id.parse::<i64>().ok())
            .collect();
        if numeric.is_some() {
            pending.sort_by_key(|p| (p.utterance.utterance_id.parse::<i64>().unwrap(), p.order));
        } else {
            pending.sort_by_key(|p| p.order);
        }

        let utterances = pending.into_iter().map(|p| p.utterance).collect();
        match Dialogue::new(dialogue_id, utterances) {
            Ok(d) => dialogues.push(d),
            Err(err) if options.lenient => warnings.push(format!("dropped dialogue: {err}")),
            Err(err) => return Err(err),
        }
    }

    Ok(LoadedCorpus {
        corpus: Corpus::new(name, dialogues)?,
        warnings,
    })
}

/// Fills in `normalized_position` from the per-(dialogue, role) maximum
/// position and sorts by `(dialogue_id, role, position)`.
pub fn finalize_records(records: &mut [ComplexityRecord]) {
    let mut counts: HashMap<(String, Role), usize> = HashMap::new();
    for r in records.iter() {
        let n = counts.entry((r.dialogue_id.clone(), r.role)).or_default();
        *n = (*n).max(r.position);
    }
    for r in records.iter_mut() {
        let n = counts[&(r.dialogue_id.clone(), r.role)];
        r.normalized_position = r.position as f64 / n as f64;
    }
    records.sort_by(|a, b| {
        (a.dialogue_id.as_str(), a.role, a.position).cmp(&(
            b.dialogue_id.as_str(),
            b.role,
            b.position,
        ))
    });
}

fn dialogue_records(
    dialogue: &Dialogue,
    config: &ComplexityConfig,
    options: MetricsOptions,
) -> Vec<ComplexityRecord> {
    let roles = assign_roles(dialogue);
    let mut next_position: HashMap<&str, usize> = HashMap::new();
    dialogue
        .utterances()
        .iter()
        .map(|u| {
            let position = next_position.entry(u.speaker.as_str()).or_insert(0);
            *position += 1;
            let metrics = TreeMetrics::compute(&u.tree, options);
            ComplexityRecord {
                dialogue_id: dialogue.id().to_owned(),
                speaker: u.speaker.clone(),
                role: roles[&u.speaker],
                position: *position,
                normalized_position: 0.0,
                sc: syntactic_complexity(&metrics, config),
                components: Some(metrics),
                isc: Some(isc_score(&u.tree, config)),
            }
        })
        .collect()
}

/// One record per utterance, positions counted per speaker.
pub fn complexity_series(
    corpus: &Corpus,
    config: &ComplexityConfig,
    options: MetricsOptions,
) -> Vec<ComplexityRecord> {
    let mut records: Vec<ComplexityRecord> = corpus
        .dialogues
        .par_iter()
        .flat_map_iter(|d| dialogue_records(d, config, options))
        .collect();
    finalize_records(&mut records);
    records
}

/// Records of a single role, order preserved.
pub fn records_for_role(records: &[ComplexityRecord], role: Role) -> Vec<ComplexityRecord> {
    records.iter().filter(|r| r.role == role).cloned().collect()
}
