use std::collections::HashMap;
use std::hash::Hash;

use crate::data::Corpus;
use crate::extractor::{extract_events, EntityMode, Model, PredictedEvent};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl TaskMetrics {
    pub fn zero() -> Self {
        TaskMetrics { precision: 0.0, recall: 0.0, f1: 0.0 }
    }
}

/// Mean training rewards per RL task.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaskRewards {
    pub sequence: f64,
    pub trigger: f64,
    pub argument: f64,
}

/// Scores for the four evaluation tasks plus the training-side statistics
/// of the epoch that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub trigger_identification: TaskMetrics,
    pub trigger_labeling: TaskMetrics,
    pub argument_identification: TaskMetrics,
    pub role_labeling: TaskMetrics,
    pub mean_rewards: TaskRewards,
    pub explore_fraction: f64,
}

impl EpochMetrics {
    pub fn tasks(&self) -> [(&'static str, TaskMetrics); 4] {
        [
            ("trigger_identification", self.trigger_identification),
            ("trigger_labeling", self.trigger_labeling),
            ("argument_identification", self.argument_identification),
            ("role_labeling", self.role_labeling),
        ]
    }
}

/// Micro P/R/F1 from exact multiset matching: each predicted item can
/// consume at most one identical gold item. Empty denominators score 0,
/// including F1 when P + R = 0.
pub fn score_spans<T: Eq + Hash>(gold: &[T], predicted: &[T]) -> TaskMetrics {
    let mut gold_counts: HashMap<&T, usize> = HashMap::new();
    for g in gold {
        *gold_counts.entry(g).or_insert(0) += 1;
    }
    let mut matched = 0usize;
    for p in predicted {
        if let Some(count) = gold_counts.get_mut(p) {
            if *count > 0 {
                *count -= 1;
                matched += 1;
            }
        }
    }
    let precision = if predicted.is_empty() { 0.0 } else { matched as f64 / predicted.len() as f64 };
    let recall = if gold.is_empty() { 0.0 } else { matched as f64 / gold.len() as f64 };
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    TaskMetrics { precision, recall, f1 }
}

// Match keys for the four tasks. The sentence index keeps items from
// different sentences apart under micro-averaging.
type TriggerId = (usize, usize, usize);
type TriggerLabel = (usize, usize, usize, String);
type ArgId = (usize, String, usize, usize);
type RoleLabel = (usize, String, usize, usize, String);

struct ItemSets {
    trigger_id: Vec<TriggerId>,
    trigger_label: Vec<TriggerLabel>,
    arg_id: Vec<ArgId>,
    role_label: Vec<RoleLabel>,
}

impl ItemSets {
    fn new() -> Self {
        ItemSets { trigger_id: vec![], trigger_label: vec![], arg_id: vec![], role_label: vec![] }
    }
}

/// Scores predictions against gold annotations under the ACE criteria:
/// a trigger is correct if its offsets (identification) and additionally
/// its event type (labeling) match; an argument is correct if event type
/// and offsets (identification) and additionally its role (labeling)
/// match.
pub fn score_predictions(corpus: &Corpus, predictions: &[Vec<PredictedEvent>]) -> EpochMetrics {
    let mut gold = ItemSets::new();
    let mut pred = ItemSets::new();

    for (i, sentence) in corpus.sentences.iter().enumerate() {
        for event in &sentence.events {
            gold.trigger_id.push((i, event.trigger_start, event.trigger_end));
            gold.trigger_label.push((i, event.trigger_start, event.trigger_end, event.event_type.clone()));
            for arg in &event.args {
                let entity = &sentence.entities[arg.entity];
                gold.arg_id.push((i, event.event_type.clone(), entity.start, entity.end));
                gold.role_label.push((
                    i,
                    event.event_type.clone(),
                    entity.start,
                    entity.end,
                    arg.role.clone(),
                ));
            }
        }
    }
    for (i, events) in predictions.iter().enumerate() {
        for event in events {
            pred.trigger_id.push((i, event.trigger.0, event.trigger.1));
            pred.trigger_label.push((i, event.trigger.0, event.trigger.1, event.event_type.clone()));
            for arg in &event.args {
                pred.arg_id.push((i, event.event_type.clone(), arg.span.0, arg.span.1));
                pred.role_label.push((i, event.event_type.clone(), arg.span.0, arg.span.1, arg.role.clone()));
            }
        }
    }

    EpochMetrics {
        epoch: 0,
        trigger_identification: score_spans(&gold.trigger_id, &pred.trigger_id),
        trigger_labeling: score_spans(&gold.trigger_label, &pred.trigger_label),
        argument_identification: score_spans(&gold.arg_id, &pred.arg_id),
        role_labeling: score_spans(&gold.role_label, &pred.role_label),
        mean_rewards: TaskRewards::default(),
        explore_fraction: 0.0,
    }
}

/// Runs the greedy pipeline over a corpus and scores the four tasks.
pub fn evaluate(corpus: &Corpus, model: &Model, entity_mode: EntityMode) -> Result<EpochMetrics> {
    let mut predictions = Vec::with_capacity(corpus.sentences.len());
    for sentence in &corpus.sentences {
        predictions.push(extract_events(model, sentence, entity_mode)?);
    }
    Ok(score_predictions(corpus, &predictions))
}
