use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::data::Corpus;
use crate::extractor::{
    build_argument_state, classify_argument, classify_trigger, label_sequence, pg_loss,
    ActionChoice, ExplorationPolicy, Model,
};
use crate::extractor::{q_targets, q_update_loss};
use crate::gail::{
    gail_reward, gail_rewards, update_discriminators, DiscriminatorBank, FixedRewardProvider,
    SampleBuffers,
};
use crate::nn::Mode;
use crate::numerics::{adam_step, zero_grads, Tape, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
use crate::trainer::{TaskRewards, TrainConfig};
use crate::{Error, Result};

/// Reward source for an epoch. Fixed mode never constructs a
/// discriminator.
pub enum RewardProvider {
    Fixed(FixedRewardProvider),
    Gail { bank: DiscriminatorBank, buffers: SampleBuffers },
}

impl RewardProvider {
    pub fn bank(&self) -> Option<&DiscriminatorBank> {
        match self {
            RewardProvider::Fixed(_) => None,
            RewardProvider::Gail { bank, .. } => Some(bank),
        }
    }
}

/// Training-side aggregates for one epoch.
#[derive(Debug, Clone)]
pub struct TrainStats {
    pub mean_rewards: TaskRewards,
    pub explore_fraction: f64,
    pub discriminator_updates: usize,
}

struct RewardSums {
    seq: (f64, usize),
    trigger: (f64, usize),
    argument: (f64, usize),
}

/// One pass over the training split, in seeded shuffle order.
///
/// Per sentence: (1) encode, roll out the ε-greedy sequence labeler,
/// reward each position, and take one Adam step on the Bellman MSE through
/// the sequence head and encoder; (2) re-encode and run one teacher-forced
/// trigger episode per gold trigger (policy-gradient step through trigger
/// head and encoder), then the argument episodes against every gold entity
/// candidate (their summed policy-gradient loss takes one step through the
/// argument head and encoder). In GAIL mode the rollouts feed the
/// expert/agent buffers and the discriminators take one Adam step per
/// batch of sentences, after which the buffers are cleared.
pub fn train_epoch(
    corpus: &Corpus,
    model: &Model,
    provider: &mut RewardProvider,
    config: &TrainConfig,
    explore: &mut ExplorationPolicy,
    rng: &mut ChaCha8Rng,
) -> Result<TrainStats> {
    let mut sums = RewardSums { seq: (0.0, 0), trigger: (0.0, 0), argument: (0.0, 0) };
    let mut disc_updates = 0usize;
    let mut pending_sentences = 0usize;

    let mut order: Vec<usize> = (0..corpus.sentences.len()).collect();
    order.shuffle(rng);

    for &idx in &order {
        let sentence = &corpus.sentences[idx];
        let gold_bio = sentence.bio_labels(config.labeling_schema, &model.labels)?;

        // --- sequence labeling episode ---
        let mut tape = Tape::new();
        let env = model.encoder.encode(&mut tape, sentence, &model.vocab, Mode::Train, rng)?;
        let mut rollout =
            label_sequence(&model.seq_head, &mut tape, env, &mut ActionChoice::Explore(explore))?;

        let rewards: Vec<f64> = match provider {
            RewardProvider::Fixed(fixed) => rollout
                .actions
                .iter()
                .zip(&gold_bio)
                .map(|(&a, &g)| fixed.fixed_reward(a, g))
                .collect(),
            RewardProvider::Gail { bank, .. } => {
                let states: Vec<Vec<f64>> =
                    rollout.trajectory.iter().map(|t| t.state.clone()).collect();
                gail_rewards(&bank.seq, &states, &rollout.actions)?
            }
        };
        if let RewardProvider::Fixed(fixed) = provider {
            let (c_ok, c_bad) = fixed.values();
            for ((&a, &g), &r) in rollout.actions.iter().zip(&gold_bio).zip(&rewards) {
                let expected = if a == g { c_ok } else { c_bad };
                if r != expected {
                    return Err(Error::invalid("train_epoch", "fixed-reward audit failed"));
                }
            }
        }
        for (transition, &r) in rollout.trajectory.iter_mut().zip(&rewards) {
            transition.reward = Some(r);
            sums.seq.0 += r;
            sums.seq.1 += 1;
        }

        let targets = q_targets(&rollout.trajectory, &rollout.q_values, config.gamma)?;
        let loss = q_update_loss(&mut tape, rollout.q_node, &rollout.actions, &targets)?;
        let group = model.seq_group();
        zero_grads(&group);
        tape.backward(loss)?;
        adam_step(&group, config.lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)?;
        zero_grads(&group);

        if let RewardProvider::Gail { buffers, .. } = provider {
            for (transition, &gold) in rollout.trajectory.iter().zip(&gold_bio) {
                buffers.seq.record(transition.state.clone(), gold, transition.action, None);
            }
        }

        // --- trigger and argument episodes (teacher forcing) ---
        if !sentence.events.is_empty() {
            let mut tape = Tape::new();
            let env = model.encoder.encode(&mut tape, sentence, &model.vocab, Mode::Train, rng)?;
            for event in &sentence.events {
                let t_tr = event.trigger_start;
                let decision = classify_trigger(
                    &model.trigger_head,
                    &mut tape,
                    env,
                    t_tr,
                    &mut ActionChoice::Explore(explore),
                )?;
                let gold_action = model
                    .schema
                    .event_type_index(&event.event_type)
                    .expect("validated event type");
                let reward = match provider {
                    RewardProvider::Fixed(fixed) => fixed.fixed_reward(decision.action, gold_action),
                    RewardProvider::Gail { bank, .. } => {
                        gail_reward(&bank.trigger, &decision.state, decision.action)?
                    }
                };
                sums.trigger.0 += reward;
                sums.trigger.1 += 1;
                let loss = pg_loss(&mut tape, decision.dist, decision.action, reward)?;
                let group = model.trigger_group();
                zero_grads(&group);
                tape.backward(loss)?;
                adam_step(&group, config.lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)?;
                zero_grads(&group);
                if let RewardProvider::Gail { buffers, .. } = provider {
                    buffers.trigger.record(
                        decision.state.clone(),
                        gold_action,
                        decision.action,
                        Some(decision.probs.clone()),
                    );
                }

                if sentence.entities.is_empty() {
                    continue;
                }
                let mut arg_loss: Option<crate::numerics::NodeId> = None;
                for (entity_idx, entity) in sentence.entities.iter().enumerate() {
                    let t_ar = entity.start;
                    let (state_node, state_values) = build_argument_state(
                        &mut tape,
                        env,
                        t_tr,
                        t_ar,
                        gold_bio[t_ar],
                        model.labels.len(),
                        &sentence.deps,
                        &model.dep_vocab,
                    )?;
                    let arg_decision = classify_argument(
                        &model.argument_head,
                        &mut tape,
                        state_node,
                        &event.event_type,
                        &entity.entity_type,
                        &model.schema,
                        &mut ActionChoice::Explore(explore),
                    )?;
                    let gold_role = event
                        .args
                        .iter()
                        .find(|a| a.entity == entity_idx)
                        .map(|a| model.schema.role_index(&a.role).expect("validated role"))
                        .unwrap_or_else(|| model.argument_head.none_action());
                    let reward = match provider {
                        RewardProvider::Fixed(fixed) => {
                            fixed.fixed_reward(arg_decision.action, gold_role)
                        }
                        RewardProvider::Gail { bank, .. } => {
                            let disc = bank.select_argument(&model.schema, &event.event_type)?;
                            gail_reward(disc, &state_values, arg_decision.action)?
                        }
                    };
                    sums.argument.0 += reward;
                    sums.argument.1 += 1;
                    let episode_loss =
                        pg_loss(&mut tape, arg_decision.dist, arg_decision.action, reward)?;
                    arg_loss = Some(match arg_loss {
                        None => episode_loss,
                        Some(acc) => tape.add(acc, episode_loss)?,
                    });
                    if let RewardProvider::Gail { buffers, .. } = provider {
                        buffers.argument[gold_action].record(
                            state_values,
                            gold_role,
                            arg_decision.action,
                            Some(arg_decision.probs.clone()),
                        );
                    }
                }
                if let Some(loss) = arg_loss {
                    let group = model.argument_group();
                    zero_grads(&group);
                    tape.backward(loss)?;
                    adam_step(&group, config.lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)?;
                    zero_grads(&group);
                }
            }
        }

        pending_sentences += 1;
        if let RewardProvider::Gail { bank, buffers } = provider {
            if pending_sentences % config.disc_batch_sentences == 0 && !buffers.is_empty() {
                update_discriminators(bank, buffers, config.lr, config.entropy_weight)?;
                buffers.clear();
                disc_updates += 1;
            }
        }
    }

    // flush the tail batch; buffers never carry across epochs
    if let RewardProvider::Gail { bank, buffers } = provider {
        if !buffers.is_empty() {
            update_discriminators(bank, buffers, config.lr, config.entropy_weight)?;
            buffers.clear();
            disc_updates += 1;
        }
    }

    let mean = |&(sum, count): &(f64, usize)| if count == 0 { 0.0 } else { sum / count as f64 };
    Ok(TrainStats {
        mean_rewards: TaskRewards {
            sequence: mean(&sums.seq),
            trigger: mean(&sums.trigger),
            argument: mean(&sums.argument),
        },
        explore_fraction: explore.explore_fraction(),
        discriminator_updates: disc_updates,
    })
}
