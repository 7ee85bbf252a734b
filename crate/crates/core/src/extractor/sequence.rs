use rand::Rng;

use crate::extractor::{ActionChoice, Transition, Trajectory};
use crate::nn::{EmbeddingTable, FeedForward, LstmCell, OutputActivation};
use crate::numerics::{NodeId, Parameter, Tape, Tensor};
use crate::{Error, Result};

/// Q-learning sequence labeler. A single-direction state LSTM consumes
/// `concat(environment embedding, embedding of the previously committed
/// action)`; a feed-forward head maps its hidden state to one Q value per
/// BIO label. The action table carries one extra learned row used as the
/// start-of-sentence "previous action".
pub struct SequenceLabelerHead {
    pub action_emb: EmbeddingTable,
    cell: LstmCell,
    q_ff: FeedForward,
    n_labels: usize,
}

impl SequenceLabelerHead {
    pub fn new(
        env_dim: usize,
        action_dim: usize,
        hidden: usize,
        n_labels: usize,
        rng: &mut impl Rng,
    ) -> Self {
        SequenceLabelerHead {
            action_emb: EmbeddingTable::new("seq/action", n_labels + 1, action_dim, rng),
            cell: LstmCell::new("seq/state", env_dim + action_dim, hidden, rng),
            q_ff: FeedForward::new("seq/q", &[hidden, hidden, n_labels], OutputActivation::None, rng),
            n_labels,
        }
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    /// Index of the start-of-sentence action embedding row.
    pub fn sos_action(&self) -> usize {
        self.n_labels
    }

    pub fn params(&self) -> Vec<Parameter> {
        let mut params = self.action_emb.params();
        params.extend(self.cell.params());
        params.extend(self.q_ff.params());
        params
    }
}

/// Everything produced by one pass over a sentence.
pub struct Rollout {
    pub actions: Vec<usize>,
    /// `n x |labels|` Q matrix on the tape.
    pub q_node: NodeId,
    /// Detached copy of the Q matrix (bootstrap targets read from here).
    pub q_values: Tensor,
    pub trajectory: Trajectory,
}

/// Left-to-right rollout. At each position the committed previous action
/// (start-of-sentence row at t=0) is embedded and fed with the environment
/// row into the state LSTM; actions come from `choice` over that step's Q
/// row. The per-step state LSTM hidden vectors are kept as detached copies
/// for the discriminators.
pub fn label_sequence(
    head: &SequenceLabelerHead,
    tape: &mut Tape,
    env: NodeId,
    choice: &mut ActionChoice,
) -> Result<Rollout> {
    let n = tape.value(env).rows();
    let hidden = head.cell.hidden_dim();
    let rec = head.cell.record(tape);
    let mut h = tape.constant(Tensor::zeros(1, hidden));
    let mut c = tape.constant(Tensor::zeros(1, hidden));
    let mut prev_action = head.sos_action();
    let mut q_rows = Vec::with_capacity(n);
    let mut actions = Vec::with_capacity(n);
    let mut trajectory = Vec::with_capacity(n);

    for t in 0..n {
        let env_row = tape.slice_rows(env, t, t + 1)?;
        let act = head.action_emb.lookup(tape, prev_action)?;
        let x = tape.concat_cols(&[env_row, act])?;
        let (h_next, c_next) = head.cell.step_recorded(tape, &rec, x, h, c)?;
        h = h_next;
        c = c_next;
        let q = head.q_ff.forward(tape, h)?;
        let scores = tape.value(q).row(0).to_vec();
        let (action, explored) = choice.choose(t, &scores, None)?;
        trajectory.push(Transition {
            state: tape.value(h).row(0).to_vec(),
            action,
            reward: None,
            terminal: t + 1 == n,
            explored,
        });
        q_rows.push(q);
        actions.push(action);
        prev_action = action;
    }

    let q_node = tape.concat_rows(&q_rows)?;
    let q_values = tape.value(q_node).clone();
    Ok(Rollout { actions, q_node, q_values, trajectory })
}

/// Bellman targets from the rollout's own next-step Q rows:
/// `r_t + gamma * max_a Q(s_{t+1}, a)`, and plain `r_n` at the terminal
/// step. Targets are constants; no gradient flows through the bootstrap.
pub fn q_targets(trajectory: &Trajectory, q_values: &Tensor, gamma: f64) -> Result<Vec<f64>> {
    let n = trajectory.len();
    if q_values.rows() != n {
        return Err(Error::ShapeMismatch {
            op: "q_targets",
            lhs: format!("{n} transitions"),
            rhs: q_values.shape_str(),
        });
    }
    let mut targets = Vec::with_capacity(n);
    for (t, transition) in trajectory.iter().enumerate() {
        let reward = transition
            .reward
            .ok_or_else(|| Error::invalid("q_targets", format!("missing reward at step {t}")))?;
        if transition.terminal {
            targets.push(reward);
        } else {
            let next_max = q_values.row(t + 1).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            targets.push(reward + gamma * next_max);
        }
    }
    Ok(targets)
}

/// Mean squared error between targets and the Q values of the chosen
/// actions. Non-chosen entries get exactly zero gradient.
pub fn q_update_loss(
    tape: &mut Tape,
    q_node: NodeId,
    actions: &[usize],
    targets: &[f64],
) -> Result<NodeId> {
    let (n, k) = tape.value(q_node).shape();
    if actions.len() != n || targets.len() != n {
        return Err(Error::ShapeMismatch {
            op: "q_update_loss",
            lhs: format!("{n} Q rows"),
            rhs: format!("{} actions / {} targets", actions.len(), targets.len()),
        });
    }
    let mut mask = Tensor::zeros(n, k);
    let mut neg_target = Tensor::zeros(n, k);
    for (t, (&action, &target)) in actions.iter().zip(targets).enumerate() {
        if action >= k {
            return Err(Error::invalid("q_update_loss", format!("action {action} out of {k}")));
        }
        mask.set(t, action, 1.0);
        neg_target.set(t, action, -target);
    }
    let mask = tape.constant(mask);
    let neg_target = tape.constant(neg_target);
    let selected = tape.mul(q_node, mask)?;
    let diff = tape.add(selected, neg_target)?;
    let squared = tape.mul(diff, diff)?;
    let total = tape.sum(squared);
    Ok(tape.scalar_mul(total, 1.0 / n as f64))
}
