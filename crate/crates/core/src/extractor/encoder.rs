use rand::Rng;

use crate::data::{Sentence, Vocab};
use crate::nn::{
    bilstm_forward, embed_tokens, DropoutPolicy, EmbeddingTable, LstmCell, Mode,
    PretrainedEmbeddings,
};
use crate::numerics::{NodeId, Parameter, Tape};
use crate::Result;

/// Shared environment function: token embeddings through a Bi-LSTM. Every
/// subtask reads its states out of this encoder's per-token rows, which is
/// what couples the three heads together during training.
pub struct EnvironmentEncoder {
    pub surface: EmbeddingTable,
    pub pos: EmbeddingTable,
    pub pretrained: PretrainedEmbeddings,
    fwd: LstmCell,
    bwd: LstmCell,
    dropout: DropoutPolicy,
    hidden: usize,
}

impl EnvironmentEncoder {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        vocab: &Vocab,
        pretrained: PretrainedEmbeddings,
        dim_surface: usize,
        dim_pos: usize,
        hidden: usize,
        dropout: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let input_dim = dim_surface + dim_pos + pretrained.dim();
        EnvironmentEncoder {
            surface: EmbeddingTable::new("enc/surface", vocab.surface_size(), dim_surface, rng),
            pos: EmbeddingTable::new("enc/pos", vocab.pos_size(), dim_pos, rng),
            pretrained,
            fwd: LstmCell::new("enc/fwd", input_dim, hidden, rng),
            bwd: LstmCell::new("enc/bwd", input_dim, hidden, rng),
            dropout: DropoutPolicy { rate: dropout },
            hidden,
        }
    }

    /// Width of one environment embedding row.
    pub fn output_dim(&self) -> usize {
        2 * self.hidden
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    /// Per-token environment embeddings, an `n x 2*hidden` matrix.
    pub fn encode(
        &self,
        tape: &mut Tape,
        sentence: &Sentence,
        vocab: &Vocab,
        mode: Mode,
        rng: &mut impl Rng,
    ) -> Result<NodeId> {
        let embedded = embed_tokens(
            sentence,
            vocab,
            &self.surface,
            &self.pos,
            &self.pretrained,
            self.dropout,
            mode,
            rng,
            tape,
        )?;
        bilstm_forward(&self.fwd, &self.bwd, tape, embedded)
    }

    /// Trainable parameters (the pretrained table is frozen).
    pub fn params(&self) -> Vec<Parameter> {
        let mut params = self.surface.params();
        params.extend(self.pos.params());
        params.extend(self.fwd.params());
        params.extend(self.bwd.params());
        params
    }
}
