//! Joint event extraction as imitation learning.
//!
//! The extractor labels entity/trigger spans with a Q-learning sequence
//! labeler, then classifies event types and argument roles with
//! policy-gradient heads. All three subtasks share a bidirectional
//! recurrent environment encoder. Rewards are either fixed (+1/-1 against
//! gold) or estimated dynamically by a bank of adversarial discriminators
//! that score how expert-like a (state, action) pair looks.
//!
//! Module map:
//! - [`numerics`]: dense tensors, reverse-mode autodiff tape, Adam.
//! - [`nn`]: embedding tables, LSTM cells, feed-forward stacks.
//! - [`data`]: corpus model, BIO codec, ingestion, synthetic generator.
//! - [`extractor`]: the policy (encoder + three task heads + exploration).
//! - [`gail`]: fixed rewards and the discriminator bank.
//! - [`trainer`]: epoch orchestration, scoring, metrics, checkpoints.

pub mod data;
pub mod error;
pub mod extractor;
pub mod gail;
pub mod nn;
pub mod numerics;
pub mod trainer;

pub use error::{Error, Result};
