//! The policy: shared environment encoder, Q-learning sequence labeler,
//! and policy-gradient trigger/argument heads with ε-greedy exploration.

mod encoder;
mod events;
mod explore;
mod heads;
mod model;
mod sequence;

pub use encoder::EnvironmentEncoder;
pub use events::{entity_candidates, extract_events, EntityMode, PredictedArg, PredictedEvent};
pub use explore::{argmax_masked, epsilon_greedy, ActionChoice, ExplorationPolicy};
pub use heads::{
    build_argument_state, classify_argument, classify_trigger, event_type_name, pg_loss, role_name,
    ArgumentHead, Decision, TriggerHead,
};
pub use model::{Model, ModelDims};
pub use sequence::{label_sequence, q_targets, q_update_loss, Rollout, SequenceLabelerHead};

/// One (state, action, reward) step. The state is a detached copy of the
/// vector the discriminator scores for this task. Rewards are filled in
/// after the rollout.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: Option<f64>,
    pub terminal: bool,
    pub explored: bool,
}

/// Ordered transitions for one episode. Sequence-labeling episodes span the
/// sentence (only the last step terminal); trigger and argument episodes
/// have length 1.
pub type Trajectory = Vec<Transition>;
