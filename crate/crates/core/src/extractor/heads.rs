use rand::Rng;

use crate::data::{DepEdge, DepVocab, EventSchema, NONE_LABEL};
use crate::extractor::ActionChoice;
use crate::nn::{FeedForward, OutputActivation};
use crate::numerics::{NodeId, Parameter, Tape, Tensor};
use crate::{Error, Result};

/// Outcome of a single-step classification episode. The state vector is a
/// detached copy for the discriminators; the distribution node stays on the
/// tape for the policy-gradient loss.
pub struct Decision {
    pub dist: NodeId,
    pub probs: Vec<f64>,
    pub action: usize,
    pub state: Vec<f64>,
    pub explored: bool,
}

/// Softmax head over event types plus a trailing `None` action, applied to
/// the trigger token's environment embedding.
pub struct TriggerHead {
    ff: FeedForward,
    n_event_types: usize,
}

impl TriggerHead {
    pub fn new(env_dim: usize, hidden: usize, n_event_types: usize, rng: &mut impl Rng) -> Self {
        TriggerHead {
            ff: FeedForward::new(
                "trig/ff",
                &[env_dim, hidden, n_event_types + 1],
                OutputActivation::Softmax,
                rng,
            ),
            n_event_types,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_event_types + 1
    }

    /// Index of the `None` (not an event) action.
    pub fn none_action(&self) -> usize {
        self.n_event_types
    }

    pub fn params(&self) -> Vec<Parameter> {
        self.ff.params()
    }
}

/// Selects an event type (or None) for the trigger at `t_tr`. Multi-token
/// trigger spans pass their first token here.
pub fn classify_trigger(
    head: &TriggerHead,
    tape: &mut Tape,
    env: NodeId,
    t_tr: usize,
    choice: &mut ActionChoice,
) -> Result<Decision> {
    let n = tape.value(env).rows();
    if t_tr >= n {
        return Err(Error::invalid("classify_trigger", format!("position {t_tr} out of {n} tokens")));
    }
    let state_node = tape.slice_rows(env, t_tr, t_tr + 1)?;
    let state = tape.value(state_node).row(0).to_vec();
    let dist = head.ff.forward(tape, state_node)?;
    let probs = tape.value(dist).row(0).to_vec();
    let (action, explored) = choice.choose(0, &probs, None)?;
    Ok(Decision { dist, probs, action, state, explored })
}

/// Softmax head over argument roles plus `None`, applied to the composite
/// argument state.
pub struct ArgumentHead {
    ff: FeedForward,
    n_roles: usize,
}

impl ArgumentHead {
    pub fn new(state_dim: usize, hidden: usize, n_roles: usize, rng: &mut impl Rng) -> Self {
        ArgumentHead {
            ff: FeedForward::new("arg/ff", &[state_dim, hidden, n_roles + 1], OutputActivation::Softmax, rng),
            n_roles,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_roles + 1
    }

    pub fn none_action(&self) -> usize {
        self.n_roles
    }

    pub fn params(&self) -> Vec<Parameter> {
        self.ff.params()
    }
}

/// Argument state per the shared-encoder design: the trigger row, the
/// candidate row, the candidate's committed BIO action as a one-hot, and
/// the dependency relation between the two tokens as a one-hot with a
/// trailing "none" bucket. Only a direct edge (either direction) counts;
/// the first matching edge wins.
pub fn build_argument_state(
    tape: &mut Tape,
    env: NodeId,
    t_tr: usize,
    t_ar: usize,
    bio_action: usize,
    n_bio_labels: usize,
    deps: &[DepEdge],
    dep_vocab: &DepVocab,
) -> Result<(NodeId, Vec<f64>)> {
    let n = tape.value(env).rows();
    if t_tr >= n || t_ar >= n {
        return Err(Error::invalid(
            "build_argument_state",
            format!("positions ({t_tr}, {t_ar}) out of {n} tokens"),
        ));
    }
    let trigger_row = tape.slice_rows(env, t_tr, t_tr + 1)?;
    let candidate_row = tape.slice_rows(env, t_ar, t_ar + 1)?;

    let mut bio_onehot = Tensor::zeros(1, n_bio_labels);
    if bio_action >= n_bio_labels {
        return Err(Error::invalid(
            "build_argument_state",
            format!("BIO action {bio_action} out of {n_bio_labels}"),
        ));
    }
    bio_onehot.set(0, bio_action, 1.0);

    let dep_id = deps
        .iter()
        .find(|e| (e.head == t_tr && e.dep == t_ar) || (e.head == t_ar && e.dep == t_tr))
        .map(|e| dep_vocab.id(&e.label))
        .unwrap_or_else(|| dep_vocab.none_bucket());
    let mut dep_onehot = Tensor::zeros(1, dep_vocab.one_hot_width());
    dep_onehot.set(0, dep_id, 1.0);

    let bio_node = tape.constant(bio_onehot);
    let dep_node = tape.constant(dep_onehot);
    let state_node = tape.concat_cols(&[trigger_row, candidate_row, bio_node, dep_node])?;
    let state = tape.value(state_node).row(0).to_vec();
    Ok((state_node, state))
}

/// Role distribution for one (trigger, candidate) pair. Roles the schema
/// forbids for this event type and entity type get probability exactly 0
/// before renormalization; `None` is never masked, and masked actions are
/// excluded from exploration.
pub fn classify_argument(
    head: &ArgumentHead,
    tape: &mut Tape,
    arg_state: NodeId,
    event_type: &str,
    candidate_entity_type: &str,
    schema: &EventSchema,
    choice: &mut ActionChoice,
) -> Result<Decision> {
    let mut mask = vec![false; head.n_actions()];
    for (i, role) in schema.roles.iter().enumerate() {
        mask[i] = !schema.role_allowed(event_type, role, candidate_entity_type);
    }
    let state = tape.value(arg_state).row(0).to_vec();
    let dist = head.ff.forward_masked(tape, arg_state, Some(&mask))?;
    let probs = tape.value(dist).row(0).to_vec();
    let (action, explored) = choice.choose(0, &probs, Some(&mask))?;
    Ok(Decision { dist, probs, action, state, explored })
}

/// Policy-gradient objective for a single-step episode:
/// `-log P(action | state) * reward`. The episode return equals the
/// immediate reward here, so a positive reward pushes the probability up
/// and a negative one pushes it down.
pub fn pg_loss(tape: &mut Tape, dist: NodeId, action: usize, reward: f64) -> Result<NodeId> {
    let (rows, k) = tape.value(dist).shape();
    if rows != 1 || action >= k {
        return Err(Error::invalid(
            "pg_loss",
            format!("action {action} incompatible with distribution {}", tape.value(dist).shape_str()),
        ));
    }
    let p = tape.value(dist).get(0, action);
    if p <= 0.0 {
        return Err(Error::invalid(
            "pg_loss",
            format!("chosen action {action} has probability {p} (masked actions cannot be chosen)"),
        ));
    }
    let selected = tape.slice_cols(dist, action, action + 1)?;
    let logp = tape.log(selected)?;
    Ok(tape.scalar_mul(logp, -reward))
}

/// Resolves a schema event-type name for a trigger-head action, or None for
/// the reserved last action.
pub fn event_type_name<'s>(schema: &'s EventSchema, head: &TriggerHead, action: usize) -> &'s str {
    if action == head.none_action() {
        NONE_LABEL
    } else {
        &schema.event_types[action]
    }
}

/// Resolves a schema role name for an argument-head action.
pub fn role_name<'s>(schema: &'s EventSchema, head: &ArgumentHead, action: usize) -> &'s str {
    if action == head.none_action() {
        NONE_LABEL
    } else {
        &schema.roles[action]
    }
}
