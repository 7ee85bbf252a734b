use std::io::Write;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{load_embeddings, Corpus, Sentence, NONE_LABEL};
use crate::extractor::{
    build_argument_state, label_sequence, ActionChoice, ExplorationPolicy, Model,
};
use crate::gail::{BankDims, DiscriminatorBank, FixedRewardProvider, SampleBuffers};
use crate::nn::{Mode, PretrainedEmbeddings};
use crate::numerics::{checkpoint, Tape};
use crate::trainer::{
    evaluate, train_epoch, EpochMetrics, RewardMode, RewardProvider, TrainConfig, TrainStats,
};
use crate::{Error, Result};

pub const METRICS_HEADER: &str = "epoch,split,task,precision,recall,f1,mean_reward,explore_fraction";
pub const REWARDS_HEADER: &str = "epoch,sentence_id,position,task,action,reward";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceTask {
    Sequence,
    Trigger,
    Argument,
}

impl TraceTask {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceTask::Sequence => "sequence",
            TraceTask::Trigger => "trigger",
            TraceTask::Argument => "argument",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sequence" => Ok(TraceTask::Sequence),
            "trigger" => Ok(TraceTask::Trigger),
            "argument" => Ok(TraceTask::Argument),
            other => Err(Error::Config(format!(
                "unknown trace task '{other}' (expected sequence, trigger or argument)"
            ))),
        }
    }
}

/// One watched location: per epoch, the reward each listed action would
/// receive at this sentence position is appended to rewards.csv.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub sentence_id: String,
    pub position: usize,
    pub task: TraceTask,
    pub actions: Vec<String>,
}

impl TraceEntry {
    /// Parses `sentence_id:position:task:action[,action...]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::Config(format!(
                "bad trace spec '{spec}' (expected sentence_id:position:task:action[,action...])"
            )));
        }
        let position = parts[1]
            .parse()
            .map_err(|_| Error::Config(format!("bad trace position '{}'", parts[1])))?;
        let actions: Vec<String> =
            parts[3].split(',').filter(|a| !a.is_empty()).map(|a| a.to_string()).collect();
        if actions.is_empty() {
            return Err(Error::Config(format!("trace spec '{spec}' lists no actions")));
        }
        Ok(TraceEntry {
            sentence_id: parts[0].to_string(),
            position,
            task: TraceTask::parse(parts[2])?,
            actions,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RewardTraceSpec {
    pub entries: Vec<TraceEntry>,
}

impl RewardTraceSpec {
    pub fn validate(&self, model: &Model, corpus: &Corpus) -> Result<()> {
        for entry in &self.entries {
            let sentence = corpus
                .sentences
                .iter()
                .find(|s| s.id == entry.sentence_id)
                .ok_or_else(|| {
                    Error::Config(format!("trace references unknown sentence id '{}'", entry.sentence_id))
                })?;
            if entry.position >= sentence.len() {
                return Err(Error::Config(format!(
                    "trace position {} out of range for sentence '{}'",
                    entry.position, entry.sentence_id
                )));
            }
            if entry.task == TraceTask::Argument && sentence.events.is_empty() {
                return Err(Error::Config(format!(
                    "argument trace on sentence '{}' which has no events",
                    entry.sentence_id
                )));
            }
            for action in &entry.actions {
                trace_action_id(model, entry.task, action)?;
            }
        }
        Ok(())
    }
}

fn trace_action_id(model: &Model, task: TraceTask, action: &str) -> Result<usize> {
    let id = match task {
        TraceTask::Sequence => model.labels.id(action),
        TraceTask::Trigger => {
            if action == NONE_LABEL {
                Some(model.trigger_head.none_action())
            } else {
                model.schema.event_type_index(action)
            }
        }
        TraceTask::Argument => {
            if action == NONE_LABEL {
                Some(model.argument_head.none_action())
            } else {
                model.schema.role_index(action)
            }
        }
    };
    id.ok_or_else(|| {
        Error::Config(format!("trace action '{action}' is not valid for the {} task", task.as_str()))
    })
}

/// Rewards the provider would issue right now for each watched action at
/// the entry's state, computed from an evaluation-mode (greedy,
/// dropout-free) pass.
fn trace_rewards(
    model: &Model,
    provider: &RewardProvider,
    config: &TrainConfig,
    sentence: &Sentence,
    entry: &TraceEntry,
) -> Result<Vec<(String, f64)>> {
    let gold_bio = sentence.bio_labels(config.labeling_schema, &model.labels)?;
    let mut tape = Tape::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let env = model.encoder.encode(&mut tape, sentence, &model.vocab, Mode::Eval, &mut rng)?;
    let fixed = FixedRewardProvider::new(config.fixed_reward_correct, config.fixed_reward_wrong)?;

    let mut out = Vec::with_capacity(entry.actions.len());
    match entry.task {
        TraceTask::Sequence => {
            let rollout = label_sequence(&model.seq_head, &mut tape, env, &mut ActionChoice::Greedy)?;
            let state = &rollout.trajectory[entry.position].state;
            let d = provider.bank().map(|b| b.seq.d_values(state)).transpose()?;
            for action in &entry.actions {
                let id = trace_action_id(model, entry.task, action)?;
                let reward = match &d {
                    Some(values) => 2.0 * values[id] - 1.0,
                    None => fixed.fixed_reward(id, gold_bio[entry.position]),
                };
                out.push((action.clone(), reward));
            }
        }
        TraceTask::Trigger => {
            let state = tape.value(env).row(entry.position).to_vec();
            let d = provider.bank().map(|b| b.trigger.d_values(&state)).transpose()?;
            let gold = sentence
                .events
                .iter()
                .find(|e| e.trigger_start <= entry.position && entry.position < e.trigger_end)
                .map(|e| model.schema.event_type_index(&e.event_type).expect("validated"))
                .unwrap_or_else(|| model.trigger_head.none_action());
            for action in &entry.actions {
                let id = trace_action_id(model, entry.task, action)?;
                let reward = match &d {
                    Some(values) => 2.0 * values[id] - 1.0,
                    None => fixed.fixed_reward(id, gold),
                };
                out.push((action.clone(), reward));
            }
        }
        TraceTask::Argument => {
            let event = &sentence.events[0];
            let (_, state) = build_argument_state(
                &mut tape,
                env,
                event.trigger_start,
                entry.position,
                gold_bio[entry.position],
                model.labels.len(),
                &sentence.deps,
                &model.dep_vocab,
            )?;
            let d = provider
                .bank()
                .map(|b| b.select_argument(&model.schema, &event.event_type)?.d_values(&state))
                .transpose()?;
            let gold = sentence
                .entities
                .iter()
                .position(|e| e.start == entry.position)
                .and_then(|entity_idx| event.args.iter().find(|a| a.entity == entity_idx))
                .map(|a| model.schema.role_index(&a.role).expect("validated"))
                .unwrap_or_else(|| model.argument_head.none_action());
            for action in &entry.actions {
                let id = trace_action_id(model, entry.task, action)?;
                let reward = match &d {
                    Some(values) => 2.0 * values[id] - 1.0,
                    None => fixed.fixed_reward(id, gold),
                };
                out.push((action.clone(), reward));
            }
        }
    }
    Ok(out)
}

pub struct SplitCorpora {
    pub train: Corpus,
    pub dev: Corpus,
    pub test: Corpus,
}

pub struct RunReport {
    pub best_epoch: usize,
    pub best_dev_role_f1: f64,
    pub test: EpochMetrics,
    pub metrics_path: PathBuf,
    pub rewards_path: PathBuf,
    pub best_checkpoint: PathBuf,
}

fn write_metric_rows(
    w: &mut impl Write,
    path: &Path,
    epoch: usize,
    split: &str,
    metrics: &EpochMetrics,
) -> Result<()> {
    // train rows carry that epoch's mean training reward per task:
    // sequence-labeling reward on the trigger_identification row, trigger
    // reward on trigger_labeling, argument reward on both argument rows
    let reward_for = |task: &str| match task {
        "trigger_identification" => metrics.mean_rewards.sequence,
        "trigger_labeling" => metrics.mean_rewards.trigger,
        _ => metrics.mean_rewards.argument,
    };
    for (task, scores) in metrics.tasks() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            epoch,
            split,
            task,
            scores.precision,
            scores.recall,
            scores.f1,
            reward_for(task),
            metrics.explore_fraction
        )
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    Ok(())
}

fn checkpoint_params(model: &Model, provider: &RewardProvider) -> Vec<crate::numerics::Parameter> {
    let mut params = model.all_params();
    if let Some(bank) = provider.bank() {
        params.extend(bank.params());
    }
    params
}

/// Builds a model for a train corpus: dictionaries from the corpus, sizes
/// and seed from the config. Deterministic, so an evaluation process can
/// reconstruct the exact structure a checkpoint was saved from.
pub fn build_model(config: &TrainConfig, train: &Corpus) -> Result<Model> {
    let vocab = crate::data::build_vocab(train);
    let dep_vocab = crate::data::build_dep_vocab(train);
    let pretrained = match &config.embeddings_path {
        Some(path) => load_embeddings(Path::new(path), config.dim_pretrained)?,
        None => PretrainedEmbeddings::new(config.dim_pretrained),
    };
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    Ok(Model::new(
        &config.model_dims(),
        train.schema.clone(),
        config.labeling_schema,
        vocab,
        dep_vocab,
        pretrained,
        &mut init_rng,
    ))
}

/// Full training run: per epoch, one training pass, greedy evaluation on
/// the train and dev splits appended to metrics.csv, reward traces
/// appended to rewards.csv, periodic checkpoints, and a best checkpoint
/// tracked by dev role-labeling F1. The best model is reloaded for the
/// final test evaluation.
pub fn run_training(
    config: &TrainConfig,
    corpora: &SplitCorpora,
    traces: &RewardTraceSpec,
    out_dir: &Path,
) -> Result<RunReport> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;

    let model = build_model(config, &corpora.train)?;

    let mut provider = match config.reward_mode {
        RewardMode::Fixed => RewardProvider::Fixed(FixedRewardProvider::new(
            config.fixed_reward_correct,
            config.fixed_reward_wrong,
        )?),
        RewardMode::Gail => {
            let mut bank_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(101));
            let dims = BankDims {
                seq_state_width: config.hidden,
                n_bio_labels: model.labels.len(),
                trigger_state_width: model.encoder.output_dim(),
                argument_state_width: model.arg_state_dim(),
                hidden: config.hidden,
            };
            RewardProvider::Gail {
                bank: DiscriminatorBank::new(&model.schema, &dims, &mut bank_rng),
                buffers: SampleBuffers::new(model.schema.event_types.len()),
            }
        }
    };

    traces.validate(&model, &corpora.train)?;

    let metrics_path = out_dir.join("metrics.csv");
    let rewards_path = out_dir.join("rewards.csv");
    let mut metrics_file = std::fs::File::create(&metrics_path)
        .map_err(|e| Error::io(metrics_path.display().to_string(), e))?;
    let mut rewards_file = std::fs::File::create(&rewards_path)
        .map_err(|e| Error::io(rewards_path.display().to_string(), e))?;
    writeln!(metrics_file, "{METRICS_HEADER}")
        .map_err(|e| Error::io(metrics_path.display().to_string(), e))?;
    writeln!(rewards_file, "{REWARDS_HEADER}")
        .map_err(|e| Error::io(rewards_path.display().to_string(), e))?;

    let mut log_traces = |epoch: usize, provider: &RewardProvider| -> Result<()> {
        for entry in &traces.entries {
            let sentence = corpora
                .sentences_by_id(&entry.sentence_id)
                .expect("trace ids validated against the train split");
            let rewards = trace_rewards(&model, provider, config, sentence, entry)?;
            for (action, reward) in rewards {
                writeln!(
                    rewards_file,
                    "{},{},{},{},{},{}",
                    epoch,
                    entry.sentence_id,
                    entry.position,
                    entry.task.as_str(),
                    action,
                    reward
                )
                .map_err(|e| Error::io(rewards_path.display().to_string(), e))?;
            }
        }
        Ok(())
    };

    let best_checkpoint = out_dir.join("checkpoint_best.ckpt");
    let mut best_epoch = 0usize;

    // initial evaluation before any training
    let train_eval = evaluate(&corpora.train, &model, config.entity_mode)?;
    let dev_eval = evaluate(&corpora.dev, &model, config.entity_mode)?;
    write_metric_rows(&mut metrics_file, &metrics_path, 0, "train", &train_eval)?;
    write_metric_rows(&mut metrics_file, &metrics_path, 0, "dev", &dev_eval)?;
    let mut best_dev_role_f1 = dev_eval.role_labeling.f1;
    checkpoint::save(&best_checkpoint, &checkpoint_params(&model, &provider))?;

    let mut explore = ExplorationPolicy::new(config.epsilon, config.seed.wrapping_add(303))?;
    let mut train_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(202));

    for epoch in 1..=config.epochs {
        explore.reset_counters();
        let stats: TrainStats =
            train_epoch(&corpora.train, &model, &mut provider, config, &mut explore, &mut train_rng)?;

        let mut train_eval = evaluate(&corpora.train, &model, config.entity_mode)?;
        train_eval.epoch = epoch;
        train_eval.mean_rewards = stats.mean_rewards;
        train_eval.explore_fraction = stats.explore_fraction;
        let mut dev_eval = evaluate(&corpora.dev, &model, config.entity_mode)?;
        dev_eval.epoch = epoch;

        write_metric_rows(&mut metrics_file, &metrics_path, epoch, "train", &train_eval)?;
        write_metric_rows(&mut metrics_file, &metrics_path, epoch, "dev", &dev_eval)?;
        log_traces(epoch, &provider)?;

        if epoch % config.checkpoint_every == 0 {
            let path = out_dir.join(format!("checkpoint_epoch_{epoch}.ckpt"));
            checkpoint::save(&path, &checkpoint_params(&model, &provider))?;
        }
        if dev_eval.role_labeling.f1 > best_dev_role_f1 {
            best_dev_role_f1 = dev_eval.role_labeling.f1;
            best_epoch = epoch;
            checkpoint::save(&best_checkpoint, &checkpoint_params(&model, &provider))?;
        }
    }

    // final test evaluation with the best checkpoint
    checkpoint::load(&best_checkpoint, &model.all_params())?;
    let mut test_eval = evaluate(&corpora.test, &model, config.entity_mode)?;
    test_eval.epoch = best_epoch;
    write_metric_rows(&mut metrics_file, &metrics_path, best_epoch, "test", &test_eval)?;
    metrics_file.flush().map_err(|e| Error::io(metrics_path.display().to_string(), e))?;
    rewards_file.flush().map_err(|e| Error::io(rewards_path.display().to_string(), e))?;

    Ok(RunReport {
        best_epoch,
        best_dev_role_f1,
        test: test_eval,
        metrics_path,
        rewards_path,
        best_checkpoint,
    })
}

impl SplitCorpora {
    fn sentences_by_id(&self, id: &str) -> Option<&Sentence> {
        for corpus in [&self.train, &self.dev, &self.test] {
            if let Some(s) = corpus.sentences.iter().find(|s| s.id == id) {
                return Some(s);
            }
        }
        None
    }
}
