use rand::Rng;

use crate::data::{EventSchema, NONE_LABEL};
use crate::gail::{discriminator_loss, Discriminator, Sample};
use crate::numerics::{adam_step, zero_grads, Parameter, Tape, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
use crate::{Error, Result};

/// The reward estimators: one discriminator for sequence labeling, one for
/// trigger classification, and one per event type for argument roles (33
/// under the default schema). All of them are independent of the policy
/// networks; training them never touches policy parameters.
pub struct DiscriminatorBank {
    pub seq: Discriminator,
    pub trigger: Discriminator,
    pub argument: Vec<Discriminator>,
}

/// State widths the bank scores, all derived from the model configuration.
#[derive(Debug, Clone, Copy)]
pub struct BankDims {
    pub seq_state_width: usize,
    pub n_bio_labels: usize,
    pub trigger_state_width: usize,
    pub argument_state_width: usize,
    pub hidden: usize,
}

impl DiscriminatorBank {
    pub fn new(schema: &EventSchema, dims: &BankDims, rng: &mut impl Rng) -> Self {
        let seq = Discriminator::new("disc/seq", dims.seq_state_width, dims.hidden, dims.n_bio_labels, rng);
        let trigger = Discriminator::new(
            "disc/trigger",
            dims.trigger_state_width,
            dims.hidden,
            schema.event_types.len() + 1,
            rng,
        );
        let argument = (0..schema.event_types.len())
            .map(|i| {
                Discriminator::new(
                    &format!("disc/arg{i}"),
                    dims.argument_state_width,
                    dims.hidden,
                    schema.roles.len() + 1,
                    rng,
                )
            })
            .collect();
        DiscriminatorBank { seq, trigger, argument }
    }

    /// The argument discriminator for an event type, indexed by its schema
    /// position. There are no arguments for `None`.
    pub fn select_argument(&self, schema: &EventSchema, event_type: &str) -> Result<&Discriminator> {
        if event_type == NONE_LABEL {
            return Err(Error::invalid(
                "select_argument_discriminator",
                "the None event type has no argument discriminator",
            ));
        }
        let index = schema.event_type_index(event_type).ok_or_else(|| {
            Error::invalid("select_argument_discriminator", format!("unknown event type '{event_type}'"))
        })?;
        Ok(&self.argument[index])
    }

    /// All discriminator parameters, under the `disc/` checkpoint prefix.
    pub fn params(&self) -> Vec<Parameter> {
        let mut params = self.seq.params();
        params.extend(self.trigger.params());
        for d in &self.argument {
            params.extend(d.params());
        }
        params
    }
}

/// Per-task expert/agent pairs collected during an epoch. Correct agent
/// actions are recorded on the expert side; the entropy of the agent's
/// action distribution is kept alongside true agent samples.
#[derive(Default)]
pub struct TaskBuffer {
    pub expert: Vec<Sample>,
    pub agent: Vec<Sample>,
    pub agent_distributions: Vec<Vec<f64>>,
}

impl TaskBuffer {
    pub fn record(
        &mut self,
        state: Vec<f64>,
        gold_action: usize,
        agent_action: usize,
        agent_distribution: Option<Vec<f64>>,
    ) {
        self.expert.push(Sample { state: state.clone(), action: gold_action });
        if agent_action == gold_action {
            self.expert.push(Sample { state, action: agent_action });
        } else {
            self.agent.push(Sample { state, action: agent_action });
            if let Some(dist) = agent_distribution {
                self.agent_distributions.push(dist);
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.expert.is_empty() && self.agent.is_empty()
    }

    pub fn clear(&mut self) {
        self.expert.clear();
        self.agent.clear();
        self.agent_distributions.clear();
    }
}

/// Sample buffers for every discriminator in a bank.
pub struct SampleBuffers {
    pub seq: TaskBuffer,
    pub trigger: TaskBuffer,
    pub argument: Vec<TaskBuffer>,
}

impl SampleBuffers {
    pub fn new(n_event_types: usize) -> Self {
        SampleBuffers {
            seq: TaskBuffer::default(),
            trigger: TaskBuffer::default(),
            argument: (0..n_event_types).map(|_| TaskBuffer::default()).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty() && self.trigger.is_empty() && self.argument.iter().all(|b| b.is_empty())
    }

    pub fn clear(&mut self) {
        self.seq.clear();
        self.trigger.clear();
        for b in &mut self.argument {
            b.clear();
        }
    }
}

/// One Adam step for every discriminator that received samples. Buffers are
/// left untouched; the trainer clears them to keep the game on-policy.
/// Returns `(task, loss)` per updated discriminator.
pub fn update_discriminators(
    bank: &DiscriminatorBank,
    buffers: &SampleBuffers,
    lr: f64,
    entropy_weight: f64,
) -> Result<Vec<(String, f64)>> {
    let mut losses = Vec::new();
    let mut update = |name: String, disc: &Discriminator, buffer: &TaskBuffer| -> Result<()> {
        if buffer.expert.is_empty() {
            return Ok(());
        }
        let dists =
            if buffer.agent_distributions.is_empty() { None } else { Some(buffer.agent_distributions.as_slice()) };
        let mut tape = Tape::new();
        let loss =
            discriminator_loss(&mut tape, disc, &buffer.expert, &buffer.agent, entropy_weight, dists)?;
        let value = tape.value(loss).scalar_value()?;
        let params = disc.params();
        zero_grads(&params);
        tape.backward(loss)?;
        adam_step(&params, lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)?;
        zero_grads(&params);
        losses.push((name, value));
        Ok(())
    };

    update("sequence".into(), &bank.seq, &buffers.seq)?;
    update("trigger".into(), &bank.trigger, &buffers.trigger)?;
    for (i, buffer) in buffers.argument.iter().enumerate() {
        update(format!("argument[{i}]"), &bank.argument[i], buffer)?;
    }
    Ok(losses)
}
