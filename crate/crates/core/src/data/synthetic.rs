use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{
    validate_sentence, Corpus, DepEdge, EntitySpan, EventArg, EventMention, EventSchema, Sentence,
    Split, Token,
};
use crate::{Error, Result};

fn default_pos() -> String {
    "NN".to_string()
}

/// One position in a template. Entity and trigger slots pick a word per
/// generated sentence; multi-word entries (separated by spaces) expand to
/// multi-token spans.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Slot {
    Word {
        text: String,
        pos: String,
    },
    Entity {
        etype: String,
        words: Vec<String>,
        #[serde(default)]
        role: Option<String>,
        #[serde(default = "default_pos")]
        pos: String,
    },
    Trigger {
        words: Vec<String>,
        #[serde(default = "default_pos")]
        pos: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotDep {
    pub head: usize,
    pub dep: usize,
    pub label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Template {
    /// Event type expressed by the trigger slot; templates without one
    /// produce event-free sentences.
    #[serde(default)]
    pub event_type: Option<String>,
    pub slots: Vec<Slot>,
    /// Dependency edges between slot indices; emitted between the first
    /// tokens of the expanded slots.
    #[serde(default)]
    pub deps: Vec<SlotDep>,
}

/// Sentence patterns for the synthetic corpus generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticGrammar {
    pub templates: Vec<Template>,
}

impl SyntheticGrammar {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }

    /// Words that can trigger events, with every event type they appear
    /// under across templates.
    pub fn trigger_lexicon(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut lexicon: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for template in &self.templates {
            let Some(event_type) = &template.event_type else { continue };
            for slot in &template.slots {
                if let Slot::Trigger { words, .. } = slot {
                    for word in words {
                        lexicon.entry(word.clone()).or_default().insert(event_type.clone());
                    }
                }
            }
        }
        lexicon
    }

    /// Hard validation against a schema plus soft warnings (currently: a
    /// grammar with no ambiguous trigger word).
    pub fn validate(&self, schema: &EventSchema) -> Result<Vec<String>> {
        if self.templates.is_empty() {
            return Err(Error::Schema("grammar has no templates".into()));
        }
        for (ti, template) in self.templates.iter().enumerate() {
            let ctx = format!("template {ti}");
            if template.slots.is_empty() {
                return Err(Error::Schema(format!("{ctx}: no slots")));
            }
            let mut trigger_slots = 0;
            for slot in &template.slots {
                match slot {
                    Slot::Word { .. } => {}
                    Slot::Entity { etype, words, role, .. } => {
                        if schema.entity_type_index(etype).is_none() {
                            return Err(Error::Schema(format!("{ctx}: unknown entity type '{etype}'")));
                        }
                        if words.is_empty() {
                            return Err(Error::Schema(format!("{ctx}: entity slot has no words")));
                        }
                        if let Some(role) = role {
                            let Some(event_type) = &template.event_type else {
                                return Err(Error::Schema(format!(
                                    "{ctx}: role '{role}' in a template without an event type"
                                )));
                            };
                            if schema.role_index(role).is_none() {
                                return Err(Error::Schema(format!("{ctx}: unknown role '{role}'")));
                            }
                            if !schema.role_allowed(event_type, role, etype) {
                                return Err(Error::Schema(format!(
                                    "{ctx}: role '{role}' not allowed for {etype} under {event_type}"
                                )));
                            }
                        }
                    }
                    Slot::Trigger { words, .. } => {
                        trigger_slots += 1;
                        if words.is_empty() {
                            return Err(Error::Schema(format!("{ctx}: trigger slot has no words")));
                        }
                    }
                }
            }
            match &template.event_type {
                Some(event_type) => {
                    if schema.event_type_index(event_type).is_none() {
                        return Err(Error::Schema(format!("{ctx}: unknown event type '{event_type}'")));
                    }
                    if trigger_slots != 1 {
                        return Err(Error::Schema(format!(
                            "{ctx}: event template needs exactly one trigger slot, found {trigger_slots}"
                        )));
                    }
                }
                None => {
                    if trigger_slots != 0 {
                        return Err(Error::Schema(format!("{ctx}: trigger slot without an event type")));
                    }
                }
            }
            for dep in &template.deps {
                if dep.head >= template.slots.len() || dep.dep >= template.slots.len() {
                    return Err(Error::Schema(format!(
                        "{ctx}: dependency ({}, {}) out of range for {} slots",
                        dep.head,
                        dep.dep,
                        template.slots.len()
                    )));
                }
            }
        }
        let mut warnings = Vec::new();
        if !self.trigger_lexicon().values().any(|types| types.len() >= 2) {
            warnings.push("no trigger word is ambiguous (maps to two or more event types)".to_string());
        }
        Ok(warnings)
    }
}

struct TemplateState {
    instances: usize,
}

fn expand_template(
    template: &Template,
    state: &mut TemplateState,
    rng: &mut ChaCha8Rng,
) -> Sentence {
    let mut tokens: Vec<Token> = Vec::new();
    let mut slot_start = Vec::with_capacity(template.slots.len());
    let mut entities = Vec::new();
    let mut entity_roles = Vec::new();
    let mut trigger_span = None;

    for slot in &template.slots {
        slot_start.push(tokens.len());
        let (text, pos): (&str, &str) = match slot {
            Slot::Word { text, pos } => (text, pos),
            Slot::Entity { words, pos, .. } => (&words[rng.gen_range(0..words.len())], pos),
            // trigger words rotate per template instance so every trigger
            // surface (including the ambiguous ones) shows up under every
            // event type it belongs to
            Slot::Trigger { words, pos } => (&words[state.instances % words.len()], pos),
        };
        let start = tokens.len();
        for piece in text.split_whitespace() {
            tokens.push(Token { surface: piece.to_string(), pos: pos.to_string(), gold_bio: 0 });
        }
        let end = tokens.len();
        match slot {
            Slot::Entity { etype, role, .. } => {
                entities.push(EntitySpan { start, end, entity_type: etype.clone() });
                entity_roles.push(role.clone());
            }
            Slot::Trigger { .. } => trigger_span = Some((start, end)),
            Slot::Word { .. } => {}
        }
    }
    state.instances += 1;

    let mut events = Vec::new();
    if let (Some(event_type), Some((start, end))) = (&template.event_type, trigger_span) {
        let args = entity_roles
            .iter()
            .enumerate()
            .filter_map(|(i, role)| role.as_ref().map(|r| EventArg { entity: i, role: r.clone() }))
            .collect();
        events.push(EventMention {
            trigger_start: start,
            trigger_end: end,
            event_type: event_type.clone(),
            args,
        });
    }

    let deps = template
        .deps
        .iter()
        .map(|d| DepEdge { head: slot_start[d.head], dep: slot_start[d.dep], label: d.label.clone() })
        .collect();

    Sentence { id: String::new(), tokens, entities, events, deps }
}

/// Generates train/dev/test corpora from a grammar. Templates are cycled so
/// every pattern (and every trigger surface) is covered, slot fills are
/// drawn from a ChaCha stream, and the final order is shuffled; the whole
/// procedure is a pure function of `(grammar, seed, sizes)`.
pub fn generate_synthetic_corpus(
    grammar: &SyntheticGrammar,
    schema: &EventSchema,
    seed: u64,
    n_train: usize,
    n_dev: usize,
    n_test: usize,
) -> Result<(Corpus, Corpus, Corpus)> {
    for (name, n) in [("n_train", n_train), ("n_dev", n_dev), ("n_test", n_test)] {
        if n == 0 {
            return Err(Error::invalid("generate_synthetic_corpus", format!("{name} must be positive")));
        }
    }
    grammar.validate(schema)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<TemplateState> =
        grammar.templates.iter().map(|_| TemplateState { instances: 0 }).collect();

    let mut make_split = |split: Split, n: usize| -> Result<Corpus> {
        let mut sentences = Vec::with_capacity(n);
        for i in 0..n {
            let t = i % grammar.templates.len();
            sentences.push(expand_template(&grammar.templates[t], &mut states[t], &mut rng));
        }
        sentences.shuffle(&mut rng);
        for (i, sentence) in sentences.iter_mut().enumerate() {
            sentence.id = format!("{}-{:04}", split.as_str(), i);
            validate_sentence(sentence, schema)?;
        }
        Ok(Corpus { sentences, schema: schema.clone(), split })
    };

    let train = make_split(Split::Train, n_train)?;
    let dev = make_split(Split::Dev, n_dev)?;
    let test = make_split(Split::Test, n_test)?;
    Ok((train, dev, test))
}

/// The built-in grammar: a small military/civic news world over the default
/// schema. The word "campaign" triggers Attack in one pattern and
/// Demonstrate in another, disambiguated only by context.
pub fn default_grammar() -> SyntheticGrammar {
    fn word(text: &str, pos: &str) -> Slot {
        Slot::Word { text: text.into(), pos: pos.into() }
    }
    fn entity(etype: &str, words: &[&str], role: Option<&str>, pos: &str) -> Slot {
        Slot::Entity {
            etype: etype.into(),
            words: words.iter().map(|w| w.to_string()).collect(),
            role: role.map(|r| r.to_string()),
            pos: pos.into(),
        }
    }
    fn trigger(words: &[&str], pos: &str) -> Slot {
        Slot::Trigger { words: words.iter().map(|w| w.to_string()).collect(), pos: pos.into() }
    }
    fn dep(head: usize, dep_: usize, label: &str) -> SlotDep {
        SlotDep { head, dep: dep_, label: label.into() }
    }

    let templates = vec![
        // "the army launched a campaign against the city"
        Template {
            event_type: Some("Attack".into()),
            slots: vec![
                word("the", "DT"),
                entity("ORG", &["army", "rebels", "militia"], Some("Attacker"), "NN"),
                word("launched", "VBD"),
                word("a", "DT"),
                trigger(&["campaign", "offensive"], "NN"),
                word("against", "IN"),
                word("the", "DT"),
                entity("GPE", &["city", "capital", "port"], Some("Target"), "NN"),
            ],
            deps: vec![dep(4, 1, "nsubj"), dep(4, 7, "nmod")],
        },
        // "the workers joined the campaign in the capital"
        Template {
            event_type: Some("Demonstrate".into()),
            slots: vec![
                word("the", "DT"),
                entity("PER", &["workers", "students", "protesters"], Some("Entity"), "NNS"),
                word("joined", "VBD"),
                word("the", "DT"),
                trigger(&["campaign", "rally"], "NN"),
                word("in", "IN"),
                word("the", "DT"),
                entity("GPE", &["capital", "city", "suburbs"], Some("Place"), "NN"),
            ],
            deps: vec![dep(4, 1, "nsubj"), dep(4, 7, "nmod")],
        },
        // "the militia attacked the town with missiles"
        Template {
            event_type: Some("Attack".into()),
            slots: vec![
                word("the", "DT"),
                entity("ORG", &["militia", "insurgents"], Some("Attacker"), "NN"),
                trigger(&["attacked", "bombed", "raided"], "VBD"),
                word("the", "DT"),
                entity("GPE", &["town", "village"], Some("Target"), "NN"),
                word("with", "IN"),
                entity("WEA", &["missiles", "rifles"], Some("Instrument"), "NNS"),
            ],
            deps: vec![dep(2, 1, "nsubj"), dep(2, 4, "dobj"), dep(2, 6, "nmod")],
        },
        // "several soldiers died near the border , the government said"
        Template {
            event_type: Some("Die".into()),
            slots: vec![
                word("several", "JJ"),
                entity("PER", &["soldiers", "civilians", "villagers"], Some("Victim"), "NNS"),
                trigger(&["died", "perished"], "VBD"),
                word("near", "IN"),
                word("the", "DT"),
                entity("LOC", &["border", "valley", "coast"], Some("Place"), "NN"),
                word(",", ","),
                word("the", "DT"),
                entity("ORG", &["government", "agency"], None, "NN"),
                word("said", "VBD"),
            ],
            deps: vec![dep(2, 1, "nsubj"), dep(2, 5, "nmod"), dep(9, 8, "nsubj")],
        },
        // "the minister met the president at the airport"
        Template {
            event_type: Some("Meet".into()),
            slots: vec![
                word("the", "DT"),
                entity("PER", &["minister", "senator", "envoy"], Some("Entity"), "NN"),
                trigger(&["met"], "VBD"),
                word("the", "DT"),
                entity("PER", &["president", "delegates"], Some("Entity"), "NN"),
                word("at", "IN"),
                word("the", "DT"),
                entity("FAC", &["airport", "palace"], Some("Place"), "NN"),
            ],
            deps: vec![dep(2, 1, "nsubj"), dep(2, 4, "dobj"), dep(2, 7, "nmod")],
        },
        // "the army moved the missiles to new york"
        Template {
            event_type: Some("Transport".into()),
            slots: vec![
                word("the", "DT"),
                entity("ORG", &["army", "company"], Some("Agent"), "NN"),
                trigger(&["moved", "shipped"], "VBD"),
                word("the", "DT"),
                entity("WEA", &["missiles", "rifles", "bombs"], Some("Artifact"), "NNS"),
                word("to", "IN"),
                entity("GPE", &["new york", "port", "capital"], Some("Destination"), "NNP"),
            ],
            deps: vec![dep(2, 1, "nsubj"), dep(2, 4, "dobj"), dep(2, 6, "nmod")],
        },
        // "the police arrested several suspects in the city"
        Template {
            event_type: Some("Arrest-Jail".into()),
            slots: vec![
                word("the", "DT"),
                entity("ORG", &["police", "authorities"], Some("Agent"), "NN"),
                trigger(&["arrested", "detained"], "VBD"),
                word("several", "JJ"),
                entity("PER", &["protesters", "suspects"], Some("Person"), "NNS"),
                word("in", "IN"),
                word("the", "DT"),
                entity("GPE", &["city", "suburbs"], Some("Place"), "NN"),
            ],
            deps: vec![dep(2, 1, "nsubj"), dep(2, 4, "dobj"), dep(2, 7, "nmod")],
        },
        // "the union collapsed last month"
        Template {
            event_type: Some("End-Org".into()),
            slots: vec![
                word("the", "DT"),
                entity("ORG", &["union", "company", "startup"], Some("Org"), "NN"),
                trigger(&["collapsed", "dissolved"], "VBD"),
                word("last", "JJ"),
                word("month", "NN"),
            ],
            deps: vec![dep(2, 1, "nsubj")],
        },
        // "the voters elected the governor yesterday"
        Template {
            event_type: Some("Elect".into()),
            slots: vec![
                word("the", "DT"),
                entity("PER", &["voters", "citizens"], Some("Entity"), "NNS"),
                trigger(&["elected", "reelected"], "VBD"),
                word("the", "DT"),
                entity("PER", &["governor", "senator"], Some("Person"), "NN"),
                word("yesterday", "RB"),
            ],
            deps: vec![dep(2, 1, "nsubj"), dep(2, 4, "dobj")],
        },
        // "the bombs wounded several civilians in the village"
        Template {
            event_type: Some("Injure".into()),
            slots: vec![
                word("the", "DT"),
                entity("WEA", &["bombs", "mines"], Some("Instrument"), "NNS"),
                trigger(&["wounded", "injured"], "VBD"),
                word("several", "JJ"),
                entity("PER", &["civilians", "soldiers"], Some("Victim"), "NNS"),
                word("in", "IN"),
                word("the", "DT"),
                entity("GPE", &["village", "town"], Some("Place"), "NN"),
            ],
            deps: vec![dep(2, 1, "nsubj"), dep(2, 4, "dobj"), dep(2, 7, "nmod")],
        },
        // event-free filler: "the tourists stayed near the bridge yesterday"
        Template {
            event_type: None,
            slots: vec![
                word("the", "DT"),
                entity("PER", &["tourists", "students"], None, "NNS"),
                word("stayed", "VBD"),
                word("near", "IN"),
                word("the", "DT"),
                entity("FAC", &["bridge", "airport"], None, "NN"),
                word("yesterday", "RB"),
            ],
            deps: vec![dep(2, 1, "nsubj"), dep(2, 5, "nmod")],
        },
        // event-free filler: "the convoy waited near the checkpoint"
        Template {
            event_type: None,
            slots: vec![
                word("the", "DT"),
                entity("VEH", &["convoy", "trucks"], None, "NN"),
                word("waited", "VBD"),
                word("near", "IN"),
                word("the", "DT"),
                entity("LOC", &["checkpoint", "border"], None, "NN"),
            ],
            deps: vec![dep(2, 1, "nsubj"), dep(2, 5, "nmod")],
        },
    ];
    SyntheticGrammar { templates }
}
