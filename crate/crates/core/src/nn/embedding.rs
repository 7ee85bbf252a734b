use std::collections::HashMap;

use rand::Rng;

use crate::data::{Sentence, Vocab, OOV_ID};
use crate::nn::{init_uniform_range, EMBEDDING_INIT_LIMIT};
use crate::numerics::{NodeId, Parameter, Tape, Tensor};
use crate::{Error, Result};

/// Trainable look-up table: one parameter row per symbol id, randomly
/// initialized. Id 0 is the OOV row for surface tables; action tables use
/// every row.
pub struct EmbeddingTable {
    rows: Vec<Parameter>,
    dim: usize,
}

impl EmbeddingTable {
    pub fn new(name_prefix: &str, n_symbols: usize, dim: usize, rng: &mut impl Rng) -> Self {
        let rows = (0..n_symbols)
            .map(|i| {
                Parameter::new(
                    format!("{name_prefix}/row{i}"),
                    init_uniform_range(1, dim, EMBEDDING_INIT_LIMIT, rng),
                )
            })
            .collect();
        EmbeddingTable { rows, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn lookup(&self, tape: &mut Tape, id: usize) -> Result<NodeId> {
        let row = self
            .rows
            .get(id)
            .ok_or_else(|| Error::invalid("embedding lookup", format!("id {id} out of {}", self.rows.len())))?;
        Ok(tape.param(row))
    }

    pub fn row(&self, id: usize) -> &Parameter {
        &self.rows[id]
    }

    pub fn params(&self) -> Vec<Parameter> {
        self.rows.clone()
    }
}

/// Frozen embeddings keyed by surface form; never updated during training.
/// Tokens without an entry fall back to the zero vector.
#[derive(Debug, Clone)]
pub struct PretrainedEmbeddings {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl PretrainedEmbeddings {
    pub fn new(dim: usize) -> Self {
        PretrainedEmbeddings { dim, entries: HashMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, token: String, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.dim);
        self.entries.insert(token, row);
    }

    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(|v| v.as_slice())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DropoutPolicy {
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Embeds a sentence as an `n x (d_surface + d_pos + d_pretrained)` matrix.
///
/// In train mode each token independently has its surface id replaced by
/// OOV with probability `dropout.rate`, and (by a second independent coin)
/// its pretrained slice zeroed. POS embeddings are never masked: the tag
/// set is closed, so OOV robustness is not needed there. Unknown surfaces
/// map to the OOV row; tokens without a pretrained entry get zeros.
pub fn embed_tokens(
    sentence: &Sentence,
    vocab: &Vocab,
    surface: &EmbeddingTable,
    pos: &EmbeddingTable,
    pretrained: &PretrainedEmbeddings,
    dropout: DropoutPolicy,
    mode: Mode,
    rng: &mut impl Rng,
    tape: &mut Tape,
) -> Result<NodeId> {
    if sentence.is_empty() {
        return Err(Error::invalid("embed_tokens", "empty sentence"));
    }
    let mut rows = Vec::with_capacity(sentence.len());
    for token in &sentence.tokens {
        let mut surface_id = vocab.surface_id(&token.surface);
        let mut zero_pretrained = false;
        if mode == Mode::Train {
            if rng.gen::<f64>() < dropout.rate {
                surface_id = OOV_ID;
            }
            if rng.gen::<f64>() < dropout.rate {
                zero_pretrained = true;
            }
        }
        let s = surface.lookup(tape, surface_id)?;
        let p = pos.lookup(tape, vocab.pos_id(&token.pos)?)?;
        let pre_values = if zero_pretrained {
            vec![0.0; pretrained.dim()]
        } else {
            pretrained.lookup(&token.surface).map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; pretrained.dim()])
        };
        let pre = tape.constant(Tensor::row_vector(pre_values));
        rows.push(tape.concat_cols(&[s, p, pre])?);
    }
    tape.concat_rows(&rows)
}
