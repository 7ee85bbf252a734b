use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{EntitySpan, Sentence, TRIGGER_TYPE};
use crate::extractor::{
    build_argument_state, classify_argument, classify_trigger, label_sequence, ActionChoice, Model,
};
use crate::nn::Mode;
use crate::numerics::Tape;
use crate::Result;

/// Where argument candidates come from at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityMode {
    /// Ground-truth entity annotations.
    GoldEntities,
    /// Entity spans decoded from the sequence labeler's own output.
    PredictedEntities,
}

impl EntityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntityMode::GoldEntities => "gold_entities",
            EntityMode::PredictedEntities => "predicted_entities",
        }
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        match s {
            "gold_entities" => Ok(EntityMode::GoldEntities),
            "predicted_entities" => Ok(EntityMode::PredictedEntities),
            other => Err(crate::Error::Config(format!(
                "unknown entity_mode '{other}' (expected gold_entities or predicted_entities)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedArg {
    pub span: (usize, usize),
    pub role: String,
    pub entity_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedEvent {
    pub trigger: (usize, usize),
    pub event_type: String,
    pub args: Vec<PredictedArg>,
}

/// Argument candidates for a sentence: gold annotations, or the entity
/// spans the labeler itself decoded (none under the triggers-only labeling,
/// which cannot express entities).
pub fn entity_candidates(
    sentence: &Sentence,
    decoded: &[(usize, usize, String)],
    mode: EntityMode,
) -> Vec<EntitySpan> {
    match mode {
        EntityMode::GoldEntities => sentence.entities.clone(),
        EntityMode::PredictedEntities => decoded
            .iter()
            .filter(|(_, _, ty)| ty != TRIGGER_TYPE)
            .map(|(start, end, ty)| EntitySpan { start: *start, end: *end, entity_type: ty.clone() })
            .collect(),
    }
}

/// Full greedy pipeline over one sentence: label the sequence, decode
/// trigger spans, type each trigger, then assign a role (or None) to every
/// entity candidate of each typed trigger. Spans are represented by their
/// first token when fed back into the heads.
pub fn extract_events(
    model: &Model,
    sentence: &Sentence,
    entity_mode: EntityMode,
) -> Result<Vec<PredictedEvent>> {
    let mut tape = Tape::new();
    // eval mode draws nothing from the stream
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let env = model.encoder.encode(&mut tape, sentence, &model.vocab, Mode::Eval, &mut rng)?;
    let rollout = label_sequence(&model.seq_head, &mut tape, env, &mut ActionChoice::Greedy)?;
    let decoded = crate::data::bio_decode(&rollout.actions, &model.labels);
    let candidates = entity_candidates(sentence, &decoded, entity_mode);

    let mut events = Vec::new();
    for (start, end, ty) in &decoded {
        if ty != TRIGGER_TYPE {
            continue;
        }
        let decision =
            classify_trigger(&model.trigger_head, &mut tape, env, *start, &mut ActionChoice::Greedy)?;
        if decision.action == model.trigger_head.none_action() {
            continue;
        }
        let event_type = model.schema.event_types[decision.action].clone();
        let mut args = Vec::new();
        for candidate in &candidates {
            let bio_action = rollout.actions[candidate.start];
            let (state_node, _) = build_argument_state(
                &mut tape,
                env,
                *start,
                candidate.start,
                bio_action,
                model.labels.len(),
                &sentence.deps,
                &model.dep_vocab,
            )?;
            let role_decision = classify_argument(
                &model.argument_head,
                &mut tape,
                state_node,
                &event_type,
                &candidate.entity_type,
                &model.schema,
                &mut ActionChoice::Greedy,
            )?;
            if role_decision.action != model.argument_head.none_action() {
                args.push(PredictedArg {
                    span: (candidate.start, candidate.end),
                    role: model.schema.roles[role_decision.action].clone(),
                    entity_type: candidate.entity_type.clone(),
                });
            }
        }
        events.push(PredictedEvent { trigger: (*start, *end), event_type, args });
    }
    Ok(events)
}
