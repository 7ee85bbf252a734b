use std::collections::HashMap;

use crate::data::{EventSchema, Sentence};
use crate::{Error, Result};

/// Name used in BIO labels and decoded spans for event triggers.
pub const TRIGGER_TYPE: &str = "Trigger";

/// Which spans the sequence labeler is supervised on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelingSchema {
    /// `{O, B-Trigger, I-Trigger}` only.
    TriggersOnly,
    /// `O`, `B-X`/`I-X` per entity type, then `B-Trigger`/`I-Trigger`.
    TriggersAndEntities,
}

impl LabelingSchema {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelingSchema::TriggersOnly => "triggers_only",
            LabelingSchema::TriggersAndEntities => "triggers_and_entities",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "triggers_only" => Ok(LabelingSchema::TriggersOnly),
            "triggers_and_entities" => Ok(LabelingSchema::TriggersAndEntities),
            other => Err(Error::Config(format!(
                "unknown labeling_schema '{other}' (expected triggers_only or triggers_and_entities)"
            ))),
        }
    }
}

/// Ordered BIO label inventory: `O` is always index 0.
#[derive(Debug, Clone)]
pub struct BioLabelSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl BioLabelSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn name(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub const O: usize = 0;

    /// Splits a non-O label into (is_begin, span type name).
    fn parts(&self, id: usize) -> Option<(bool, &str)> {
        let label = &self.labels[id];
        label
            .strip_prefix("B-")
            .map(|t| (true, t))
            .or_else(|| label.strip_prefix("I-").map(|t| (false, t)))
    }
}

/// Deterministic label inventory for a schema: `O` first, then entity types
/// in schema order (when enabled), then the trigger labels.
pub fn bio_label_set(schema: &EventSchema, labeling: LabelingSchema) -> BioLabelSet {
    let mut labels = vec!["O".to_string()];
    if labeling == LabelingSchema::TriggersAndEntities {
        for etype in &schema.entity_types {
            labels.push(format!("B-{etype}"));
            labels.push(format!("I-{etype}"));
        }
    }
    labels.push(format!("B-{TRIGGER_TYPE}"));
    labels.push(format!("I-{TRIGGER_TYPE}"));
    let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    BioLabelSet { labels, index }
}

/// Encodes a sentence's gold spans as BIO label ids. Under
/// `TriggersOnly` entity spans are ignored entirely. Overlapping spans are
/// rejected: BIO cannot represent them.
pub fn bio_encode(sentence: &Sentence, labeling: LabelingSchema, set: &BioLabelSet) -> Result<Vec<usize>> {
    let n = sentence.tokens.len();
    let mut labels = vec![BioLabelSet::O; n];
    let mut claimed: Vec<Option<usize>> = vec![None; n];
    let mut span_no = 0usize;

    let mut place = |start: usize, end: usize, type_name: &str, labels: &mut Vec<usize>, claimed: &mut Vec<Option<usize>>| -> Result<()> {
        if start >= end || end > n {
            return Err(Error::invalid(
                "bio_encode",
                format!("span [{start},{end}) out of bounds for {n} tokens"),
            ));
        }
        for t in start..end {
            if claimed[t].is_some() {
                return Err(Error::invalid(
                    "bio_encode",
                    format!("overlapping spans at token {t}"),
                ));
            }
            claimed[t] = Some(span_no);
            let prefix = if t == start { "B" } else { "I" };
            let label = format!("{prefix}-{type_name}");
            labels[t] = set
                .id(&label)
                .ok_or_else(|| Error::invalid("bio_encode", format!("label '{label}' not in label set")))?;
        }
        span_no += 1;
        Ok(())
    };

    if labeling == LabelingSchema::TriggersAndEntities {
        for entity in &sentence.entities {
            place(entity.start, entity.end, &entity.entity_type, &mut labels, &mut claimed)?;
        }
    }
    for event in &sentence.events {
        place(event.trigger_start, event.trigger_end, TRIGGER_TYPE, &mut labels, &mut claimed)?;
    }
    Ok(labels)
}

/// Decodes a BIO label sequence into `(start, end, type)` spans.
///
/// Lenient repair: an `I-X` that does not continue a span of type `X`
/// starts a new span at that token.
pub fn bio_decode(labels: &[usize], set: &BioLabelSet) -> Vec<(usize, usize, String)> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, String)> = None;
    for (t, &id) in labels.iter().enumerate() {
        match set.parts(id) {
            None => {
                if let Some((start, ty)) = open.take() {
                    spans.push((start, t, ty));
                }
            }
            Some((is_begin, ty)) => {
                let continues = !is_begin && matches!(&open, Some((_, cur)) if cur == ty);
                if !continues {
                    if let Some((start, cur)) = open.take() {
                        spans.push((start, t, cur));
                    }
                    open = Some((t, ty.to_string()));
                }
            }
        }
    }
    if let Some((start, ty)) = open {
        spans.push((start, labels.len(), ty));
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{test_sentence, EntitySpan};

    fn default_set() -> (EventSchema, BioLabelSet) {
        let schema = EventSchema::default_ace();
        let set = bio_label_set(&schema, LabelingSchema::TriggersAndEntities);
        (schema, set)
    }

    #[test]
    fn label_counts() {
        let schema = EventSchema::default_ace();
        let both = bio_label_set(&schema, LabelingSchema::TriggersAndEntities);
        assert_eq!(both.len(), 1 + 2 * 7 + 2); // 17
        let trig = bio_label_set(&schema, LabelingSchema::TriggersOnly);
        assert_eq!(trig.len(), 3);
        assert_eq!(both.name(0), "O");
        assert_eq!(trig.name(0), "O");
    }

    #[test]
    fn encode_person_span() {
        let (_, set) = default_set();
        let mut s = test_sentence(5);
        s.entities.push(EntitySpan { start: 2, end: 4, entity_type: "PER".into() });
        let labels = bio_encode(&s, LabelingSchema::TriggersAndEntities, &set).unwrap();
        let names: Vec<&str> = labels.iter().map(|&l| set.name(l)).collect();
        assert_eq!(names, vec!["O", "O", "B-PER", "I-PER", "O"]);
    }

    #[test]
    fn encode_no_spans_is_all_o() {
        let (_, set) = default_set();
        let s = test_sentence(4);
        let labels = bio_encode(&s, LabelingSchema::TriggersAndEntities, &set).unwrap();
        assert!(labels.iter().all(|&l| l == BioLabelSet::O));
    }

    #[test]
    fn encode_rejects_overlap() {
        let (_, set) = default_set();
        let mut s = test_sentence(5);
        s.entities.push(EntitySpan { start: 1, end: 3, entity_type: "PER".into() });
        s.entities.push(EntitySpan { start: 2, end: 4, entity_type: "ORG".into() });
        assert!(bio_encode(&s, LabelingSchema::TriggersAndEntities, &set).is_err());
    }

    #[test]
    fn decode_leniently_repairs_dangling_inside() {
        let (_, set) = default_set();
        let i_per = set.id("I-PER").unwrap();
        let spans = bio_decode(&[i_per, i_per], &set);
        assert_eq!(spans, vec![(0, 2, "PER".to_string())]);
    }

    #[test]
    fn decode_splits_on_type_change() {
        let (_, set) = default_set();
        let b_per = set.id("B-PER").unwrap();
        let i_org = set.id("I-ORG").unwrap();
        let spans = bio_decode(&[b_per, i_org, 0], &set);
        assert_eq!(spans, vec![(0, 1, "PER".to_string()), (1, 2, "ORG".to_string())]);
    }

    #[test]
    fn triggers_only_ignores_entities() {
        let schema = EventSchema::default_ace();
        let set = bio_label_set(&schema, LabelingSchema::TriggersOnly);
        let mut s = test_sentence(4);
        s.entities.push(EntitySpan { start: 0, end: 2, entity_type: "PER".into() });
        let labels = bio_encode(&s, LabelingSchema::TriggersOnly, &set).unwrap();
        assert!(labels.iter().all(|&l| l == BioLabelSet::O));
    }
}
