use rand::Rng;

use crate::data::{bio_label_set, BioLabelSet, DepVocab, EventSchema, LabelingSchema, Vocab};
use crate::extractor::{ArgumentHead, EnvironmentEncoder, SequenceLabelerHead, TriggerHead};
use crate::nn::PretrainedEmbeddings;
use crate::numerics::Parameter;

/// Network sizes. `hidden` applies to every LSTM and fully-connected
/// layer; the action embedding width is this artifact's own knob (the
/// remaining dimensions follow the experiment defaults).
#[derive(Debug, Clone, Copy)]
pub struct ModelDims {
    pub hidden: usize,
    pub dim_surface: usize,
    pub dim_pos: usize,
    pub dim_action: usize,
    pub dropout: f64,
}

/// The full policy: shared environment encoder plus the three task heads,
/// bundled with the dictionaries they were built against.
pub struct Model {
    pub encoder: EnvironmentEncoder,
    pub seq_head: SequenceLabelerHead,
    pub trigger_head: TriggerHead,
    pub argument_head: ArgumentHead,
    pub vocab: Vocab,
    pub dep_vocab: DepVocab,
    pub labels: BioLabelSet,
    pub schema: EventSchema,
    pub labeling: LabelingSchema,
}

impl Model {
    pub fn new(
        dims: &ModelDims,
        schema: EventSchema,
        labeling: LabelingSchema,
        vocab: Vocab,
        dep_vocab: DepVocab,
        pretrained: PretrainedEmbeddings,
        rng: &mut impl Rng,
    ) -> Self {
        let labels = bio_label_set(&schema, labeling);
        let encoder = EnvironmentEncoder::new(
            &vocab,
            pretrained,
            dims.dim_surface,
            dims.dim_pos,
            dims.hidden,
            dims.dropout,
            rng,
        );
        let env_dim = encoder.output_dim();
        let seq_head = SequenceLabelerHead::new(env_dim, dims.dim_action, dims.hidden, labels.len(), rng);
        let trigger_head = TriggerHead::new(env_dim, dims.hidden, schema.event_types.len(), rng);
        let arg_state_dim = 2 * env_dim + labels.len() + dep_vocab.one_hot_width();
        let argument_head = ArgumentHead::new(arg_state_dim, dims.hidden, schema.roles.len(), rng);
        Model {
            encoder,
            seq_head,
            trigger_head,
            argument_head,
            vocab,
            dep_vocab,
            labels,
            schema,
            labeling,
        }
    }

    pub fn arg_state_dim(&self) -> usize {
        2 * self.encoder.output_dim() + self.labels.len() + self.dep_vocab.one_hot_width()
    }

    /// Parameters updated by a sequence-labeling step (shared encoder
    /// included).
    pub fn seq_group(&self) -> Vec<Parameter> {
        let mut params = self.encoder.params();
        params.extend(self.seq_head.params());
        params
    }

    pub fn trigger_group(&self) -> Vec<Parameter> {
        let mut params = self.encoder.params();
        params.extend(self.trigger_head.params());
        params
    }

    pub fn argument_group(&self) -> Vec<Parameter> {
        let mut params = self.encoder.params();
        params.extend(self.argument_head.params());
        params
    }

    /// Every trainable parameter in checkpoint manifest order.
    pub fn all_params(&self) -> Vec<Parameter> {
        let mut params = self.encoder.params();
        params.extend(self.seq_head.params());
        params.extend(self.trigger_head.params());
        params.extend(self.argument_head.params());
        params
    }
}
