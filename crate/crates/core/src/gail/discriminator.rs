use rand::Rng;

use crate::nn::{FeedForward, OutputActivation};
use crate::numerics::{NodeId, Parameter, Tape, Tensor};
use crate::{Error, Result};

/// Adversarial reward estimator for one task: a feed-forward stack over the
/// task's state vector with one sigmoid unit per action. Output `D(s)[a]`
/// is the estimated probability that committing `a` at `s` is expert
/// behavior. No parameter is shared with the policy.
pub struct Discriminator {
    ff: FeedForward,
    input_width: usize,
    n_actions: usize,
}

impl Discriminator {
    pub fn new(name: &str, input_width: usize, hidden: usize, n_actions: usize, rng: &mut impl Rng) -> Self {
        Discriminator {
            ff: FeedForward::new(name, &[input_width, hidden, n_actions], OutputActivation::Sigmoid, rng),
            input_width,
            n_actions,
        }
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn params(&self) -> Vec<Parameter> {
        self.ff.params()
    }

    /// Per-action D values for a batch of states (`B x input_width` in,
    /// `B x n_actions` out, every entry strictly inside (0, 1)).
    pub fn forward(&self, tape: &mut Tape, states: NodeId) -> Result<NodeId> {
        if tape.value(states).cols() != self.input_width {
            return Err(Error::ShapeMismatch {
                op: "discriminator_forward",
                lhs: format!("input width {}", self.input_width),
                rhs: tape.value(states).shape_str(),
            });
        }
        self.ff.forward(tape, states)
    }

    /// D values for a single state, off-tape.
    pub fn d_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let s = tape.constant(Tensor::row_vector(state.to_vec()));
        let out = self.forward(&mut tape, s)?;
        Ok(tape.value(out).row(0).to_vec())
    }
}

/// Reward from a discriminator, rescaled from (0, 1) to (-1, 1):
/// `R(s, a) = 2 D(s, a) - 1`.
pub fn gail_reward(disc: &Discriminator, state: &[f64], action: usize) -> Result<f64> {
    let values = disc.d_values(state)?;
    values
        .get(action)
        .map(|d| 2.0 * d - 1.0)
        .ok_or_else(|| Error::invalid("gail_reward", format!("action {action} out of {}", values.len())))
}

/// Batched rewards for one rollout: a single discriminator forward over the
/// stacked states.
pub fn gail_rewards(disc: &Discriminator, states: &[Vec<f64>], actions: &[usize]) -> Result<Vec<f64>> {
    if states.len() != actions.len() {
        return Err(Error::ShapeMismatch {
            op: "gail_rewards",
            lhs: format!("{} states", states.len()),
            rhs: format!("{} actions", actions.len()),
        });
    }
    if states.is_empty() {
        return Ok(Vec::new());
    }
    let mut tape = Tape::new();
    let stacked = stack_states(&mut tape, states, disc.input_width())?;
    let d = disc.forward(&mut tape, stacked)?;
    let d = tape.value(d);
    actions
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if a >= disc.n_actions() {
                return Err(Error::invalid("gail_rewards", format!("action {a} out of {}", disc.n_actions())));
            }
            Ok(2.0 * d.get(i, a) - 1.0)
        })
        .collect()
}

/// A detached (state, action) pair: expert pairs come from the gold
/// annotations, agent pairs from the current policy's rollout.
#[derive(Debug, Clone)]
pub struct Sample {
    pub state: Vec<f64>,
    pub action: usize,
}

fn stack_states(tape: &mut Tape, states: &[Vec<f64>], width: usize) -> Result<NodeId> {
    let mut data = Vec::with_capacity(states.len() * width);
    for s in states {
        if s.len() != width {
            return Err(Error::ShapeMismatch {
                op: "discriminator batch",
                lhs: format!("state width {width}"),
                rhs: format!("{}", s.len()),
            });
        }
        data.extend_from_slice(s);
    }
    Ok(tape.constant(Tensor::from_vec(states.len(), width, data)?))
}

/// Gathers `sum_i log M[i, actions[i]]` as a scalar node.
fn sum_log_selected(tape: &mut Tape, matrix: NodeId, samples: &[Sample], n_actions: usize) -> Result<NodeId> {
    let rows = samples.len();
    let mut mask = Tensor::zeros(rows, n_actions);
    for (i, sample) in samples.iter().enumerate() {
        if sample.action >= n_actions {
            return Err(Error::invalid(
                "discriminator_loss",
                format!("action {} out of {n_actions}", sample.action),
            ));
        }
        mask.set(i, sample.action, 1.0);
    }
    let logs = tape.log(matrix)?;
    let mask = tape.constant(mask);
    let selected = tape.mul(logs, mask)?;
    Ok(tape.sum(selected))
}

/// GAN cross-entropy for one discriminator: minimizing drives D toward 1 on
/// expert pairs and 0 on agent pairs,
///
/// `-[ mean_E log D(s)[a] + mean_A log(1 - D(s)[a]) ] - w * H(pi_A)`.
///
/// The caller routes agent pairs whose action matches the gold action into
/// the expert batch first (they are indistinguishable from expert
/// behavior). The entropy of the agent's own action distributions is a
/// constant with respect to D, so it shifts the reported loss without
/// affecting the gradient.
pub fn discriminator_loss(
    tape: &mut Tape,
    disc: &Discriminator,
    expert: &[Sample],
    agent: &[Sample],
    entropy_weight: f64,
    agent_distributions: Option<&[Vec<f64>]>,
) -> Result<NodeId> {
    if expert.is_empty() {
        return Err(Error::invalid("discriminator_loss", "empty expert batch"));
    }

    let expert_states: Vec<Vec<f64>> = expert.iter().map(|s| s.state.clone()).collect();
    let stacked = stack_states(tape, &expert_states, disc.input_width())?;
    let d_expert = disc.forward(tape, stacked)?;
    let expert_sum = sum_log_selected(tape, d_expert, expert, disc.n_actions())?;
    let mut loss = tape.scalar_mul(expert_sum, -1.0 / expert.len() as f64);

    if !agent.is_empty() {
        let agent_states: Vec<Vec<f64>> = agent.iter().map(|s| s.state.clone()).collect();
        let stacked = stack_states(tape, &agent_states, disc.input_width())?;
        let d_agent = disc.forward(tape, stacked)?;
        let neg = tape.scalar_mul(d_agent, -1.0);
        let ones = tape.constant(Tensor::full(agent.len(), disc.n_actions(), 1.0));
        let one_minus = tape.add(ones, neg)?;
        let agent_sum = sum_log_selected(tape, one_minus, agent, disc.n_actions())?;
        let agent_term = tape.scalar_mul(agent_sum, -1.0 / agent.len() as f64);
        loss = tape.add(loss, agent_term)?;
    }

    if entropy_weight != 0.0 {
        if let Some(dists) = agent_distributions {
            if !dists.is_empty() {
                let mut total = 0.0;
                for dist in dists {
                    total -= dist.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>();
                }
                let mean_entropy = total / dists.len() as f64;
                let shift = tape.scalar(-entropy_weight * mean_entropy);
                loss = tape.add(loss, shift)?;
            }
        }
    }
    Ok(loss)
}
