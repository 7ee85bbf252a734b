//! Corpus model, event schema, BIO codec, ingestion, and the synthetic
//! corpus generator.

mod bio;
mod corpus;
mod embeddings;
mod schema;
mod synthetic;
mod vocab;

pub use bio::{bio_decode, bio_encode, bio_label_set, BioLabelSet, LabelingSchema, TRIGGER_TYPE};
pub use corpus::{
    load_corpus, save_corpus, validate_sentence, Corpus, DepEdge, EntitySpan, EventArg,
    EventMention, Sentence, Split, Token,
};
pub use embeddings::load_embeddings;
pub use schema::{EventSchema, NONE_LABEL};
pub use synthetic::{
    default_grammar, generate_synthetic_corpus, Slot, SlotDep, SyntheticGrammar, Template,
};
pub use vocab::{build_dep_vocab, build_vocab, DepVocab, Vocab, OOV_ID, OOV_TOKEN};

#[cfg(test)]
pub(crate) use corpus::test_sentence;
