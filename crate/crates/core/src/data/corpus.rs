use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{bio_encode, bio_label_set, BioLabelSet, EventSchema, LabelingSchema};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub pos: String,
    /// Gold BIO label id under the `TriggersAndEntities` inventory, derived
    /// from the annotated spans at load time.
    pub gold_bio: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub entity_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventArg {
    /// Index into the sentence's entity list.
    pub entity: usize,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventMention {
    pub trigger_start: usize,
    pub trigger_end: usize,
    pub event_type: String,
    pub args: Vec<EventArg>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepEdge {
    pub head: usize,
    pub dep: usize,
    pub label: String,
}

/// One annotated sentence. Spans are half-open token ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<Token>,
    pub entities: Vec<EntitySpan>,
    pub events: Vec<EventMention>,
    pub deps: Vec<DepEdge>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Gold BIO label ids under the requested labeling schema.
    pub fn bio_labels(&self, labeling: LabelingSchema, set: &BioLabelSet) -> Result<Vec<usize>> {
        bio_encode(self, labeling, set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

/// Immutable after load; safe for concurrent readers.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub schema: EventSchema,
    pub split: Split,
}

// Wire structs matching the JSONL schema exactly.
#[derive(Serialize, Deserialize)]
struct RawSentence {
    id: String,
    tokens: Vec<String>,
    pos: Vec<String>,
    #[serde(default)]
    entities: Vec<RawEntity>,
    #[serde(default)]
    events: Vec<RawEvent>,
    #[serde(default)]
    deps: Vec<RawDep>,
}

#[derive(Serialize, Deserialize)]
struct RawEntity {
    start: usize,
    end: usize,
    #[serde(rename = "type")]
    entity_type: String,
}

#[derive(Serialize, Deserialize)]
struct RawSpan {
    start: usize,
    end: usize,
}

#[derive(Serialize, Deserialize)]
struct RawArg {
    entity: usize,
    role: String,
}

#[derive(Serialize, Deserialize)]
struct RawEvent {
    trigger: RawSpan,
    #[serde(rename = "type")]
    event_type: String,
    args: Vec<RawArg>,
}

#[derive(Serialize, Deserialize)]
struct RawDep {
    head: usize,
    dep: usize,
    label: String,
}

/// Validates a sentence against the schema and fills in `gold_bio`.
pub fn validate_sentence(sentence: &mut Sentence, schema: &EventSchema) -> Result<()> {
    let fail = |msg: String| Err(Error::Sentence { id: sentence.id.clone(), msg });
    let n = sentence.tokens.len();
    if n == 0 {
        return fail("empty sentence".into());
    }
    for entity in &sentence.entities {
        if entity.start >= entity.end || entity.end > n {
            return fail(format!("entity span [{},{}) out of bounds", entity.start, entity.end));
        }
        if schema.entity_type_index(&entity.entity_type).is_none() {
            return fail(format!("unknown entity type '{}'", entity.entity_type));
        }
    }
    for event in &sentence.events {
        if event.trigger_start >= event.trigger_end || event.trigger_end > n {
            return fail(format!(
                "trigger span [{},{}) out of bounds",
                event.trigger_start, event.trigger_end
            ));
        }
        if schema.event_type_index(&event.event_type).is_none() {
            return fail(format!("unknown event type '{}'", event.event_type));
        }
        for arg in &event.args {
            if arg.entity >= sentence.entities.len() {
                return fail(format!(
                    "argument references entity index {} of {}",
                    arg.entity,
                    sentence.entities.len()
                ));
            }
            if schema.role_index(&arg.role).is_none() {
                return fail(format!("unknown role '{}'", arg.role));
            }
        }
    }
    for dep in &sentence.deps {
        if dep.head >= n || dep.dep >= n {
            return fail(format!("dependency edge ({},{}) out of bounds", dep.head, dep.dep));
        }
    }
    let set = bio_label_set(schema, LabelingSchema::TriggersAndEntities);
    let labels = bio_encode(sentence, LabelingSchema::TriggersAndEntities, &set)
        .map_err(|e| Error::Sentence { id: sentence.id.clone(), msg: e.to_string() })?;
    for (token, label) in sentence.tokens.iter_mut().zip(labels) {
        token.gold_bio = label;
    }
    Ok(())
}

fn sentence_from_raw(raw: RawSentence) -> Result<Sentence> {
    if raw.tokens.len() != raw.pos.len() {
        return Err(Error::Sentence {
            id: raw.id,
            msg: format!("{} tokens but {} POS tags", raw.tokens.len(), raw.pos.len()),
        });
    }
    Ok(Sentence {
        id: raw.id,
        tokens: raw
            .tokens
            .into_iter()
            .zip(raw.pos)
            .map(|(surface, pos)| Token { surface, pos, gold_bio: 0 })
            .collect(),
        entities: raw
            .entities
            .into_iter()
            .map(|e| EntitySpan { start: e.start, end: e.end, entity_type: e.entity_type })
            .collect(),
        events: raw
            .events
            .into_iter()
            .map(|e| EventMention {
                trigger_start: e.trigger.start,
                trigger_end: e.trigger.end,
                event_type: e.event_type,
                args: e.args.into_iter().map(|a| EventArg { entity: a.entity, role: a.role }).collect(),
            })
            .collect(),
        deps: raw.deps.into_iter().map(|d| DepEdge { head: d.head, dep: d.dep, label: d.label }).collect(),
    })
}

fn sentence_to_raw(s: &Sentence) -> RawSentence {
    RawSentence {
        id: s.id.clone(),
        tokens: s.tokens.iter().map(|t| t.surface.clone()).collect(),
        pos: s.tokens.iter().map(|t| t.pos.clone()).collect(),
        entities: s
            .entities
            .iter()
            .map(|e| RawEntity { start: e.start, end: e.end, entity_type: e.entity_type.clone() })
            .collect(),
        events: s
            .events
            .iter()
            .map(|e| RawEvent {
                trigger: RawSpan { start: e.trigger_start, end: e.trigger_end },
                event_type: e.event_type.clone(),
                args: e.args.iter().map(|a| RawArg { entity: a.entity, role: a.role.clone() }).collect(),
            })
            .collect(),
        deps: s.deps.iter().map(|d| RawDep { head: d.head, dep: d.dep, label: d.label.clone() }).collect(),
    }
}

/// Loads a JSONL corpus, validating every sentence against the schema and
/// deriving gold BIO labels. Failures name the line or the sentence id.
pub fn load_corpus(path: &Path, schema: &EventSchema, split: Split) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let mut sentences = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawSentence = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        let mut sentence = sentence_from_raw(raw).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        validate_sentence(&mut sentence, schema).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        sentences.push(sentence);
    }
    Ok(Corpus { sentences, schema: schema.clone(), split })
}

/// Writes a corpus as JSONL, one sentence per line.
pub fn save_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = std::io::BufWriter::new(file);
    for sentence in &corpus.sentences {
        let raw = sentence_to_raw(sentence);
        let line = serde_json::to_string(&raw).expect("sentence serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) fn test_sentence(n: usize) -> Sentence {
    Sentence {
        id: "test".into(),
        tokens: (0..n)
            .map(|i| Token { surface: format!("w{i}"), pos: "NN".into(), gold_bio: 0 })
            .collect(),
        entities: vec![],
        events: vec![],
        deps: vec![],
    }
}
