use std::collections::HashMap;

use crate::data::Corpus;
use crate::{Error, Result};

/// Reserved surface id for out-of-vocabulary tokens.
pub const OOV_ID: usize = 0;
pub const OOV_TOKEN: &str = "<OOV>";

/// Surface and POS dictionaries built from a training corpus. Ids follow
/// first occurrence, with the surface OOV entry reserved at id 0. POS tags
/// are a closed set: an unseen tag is an error, not an OOV.
#[derive(Debug, Clone)]
pub struct Vocab {
    surface_index: HashMap<String, usize>,
    surface_list: Vec<String>,
    pos_index: HashMap<String, usize>,
    pos_list: Vec<String>,
}

impl Vocab {
    pub fn surface_size(&self) -> usize {
        self.surface_list.len()
    }

    pub fn pos_size(&self) -> usize {
        self.pos_list.len()
    }

    pub fn surface_id(&self, token: &str) -> usize {
        self.surface_index.get(token).copied().unwrap_or(OOV_ID)
    }

    pub fn pos_id(&self, tag: &str) -> Result<usize> {
        self.pos_index
            .get(tag)
            .copied()
            .ok_or_else(|| Error::invalid("pos lookup", format!("unseen POS tag '{tag}' (closed set)")))
    }
}

pub fn build_vocab(corpus: &Corpus) -> Vocab {
    let mut vocab = Vocab {
        surface_index: HashMap::new(),
        surface_list: vec![OOV_TOKEN.to_string()],
        pos_index: HashMap::new(),
        pos_list: Vec::new(),
    };
    vocab.surface_index.insert(OOV_TOKEN.to_string(), OOV_ID);
    for sentence in &corpus.sentences {
        for token in &sentence.tokens {
            if !vocab.surface_index.contains_key(&token.surface) {
                vocab.surface_index.insert(token.surface.clone(), vocab.surface_list.len());
                vocab.surface_list.push(token.surface.clone());
            }
            if !vocab.pos_index.contains_key(&token.pos) {
                vocab.pos_index.insert(token.pos.clone(), vocab.pos_list.len());
                vocab.pos_list.push(token.pos.clone());
            }
        }
    }
    vocab
}

/// Dependency-relation dictionary; lookups that miss fall into a reserved
/// "none" bucket, which is also used for token pairs with no direct edge.
#[derive(Debug, Clone)]
pub struct DepVocab {
    index: HashMap<String, usize>,
    list: Vec<String>,
}

impl DepVocab {
    /// Number of named relations (the one-hot width is `len() + 1`).
    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn one_hot_width(&self) -> usize {
        self.list.len() + 1
    }

    pub fn none_bucket(&self) -> usize {
        self.list.len()
    }

    pub fn id(&self, label: &str) -> usize {
        self.index.get(label).copied().unwrap_or_else(|| self.none_bucket())
    }
}

pub fn build_dep_vocab(corpus: &Corpus) -> DepVocab {
    let mut index = HashMap::new();
    let mut list = Vec::new();
    for sentence in &corpus.sentences {
        for dep in &sentence.deps {
            if !index.contains_key(&dep.label) {
                index.insert(dep.label.clone(), list.len());
                list.push(dep.label.clone());
            }
        }
    }
    DepVocab { index, list }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{test_sentence, Corpus, EventSchema, Split, Token};

    #[test]
    fn first_occurrence_ids_with_reserved_oov() {
        let mut s = test_sentence(3);
        s.tokens = vec![
            Token { surface: "a".into(), pos: "NN".into(), gold_bio: 0 },
            Token { surface: "b".into(), pos: "VB".into(), gold_bio: 0 },
            Token { surface: "a".into(), pos: "NN".into(), gold_bio: 0 },
        ];
        let corpus = Corpus { sentences: vec![s], schema: EventSchema::default_ace(), split: Split::Train };
        let vocab = build_vocab(&corpus);
        assert_eq!(vocab.surface_size(), 3); // OOV, a, b
        assert_eq!(vocab.surface_id("a"), 1);
        assert_eq!(vocab.surface_id("b"), 2);
        assert_eq!(vocab.surface_id("unseen"), OOV_ID);
        assert_eq!(vocab.pos_id("NN").unwrap(), 0);
        assert!(vocab.pos_id("XX").is_err());
    }
}
