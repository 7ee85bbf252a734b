use std::path::Path;

use crate::data::LabelingSchema;
use crate::extractor::{EntityMode, ModelDims};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardMode {
    Fixed,
    Gail,
}

impl RewardMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RewardMode::Fixed => "fixed",
            RewardMode::Gail => "gail",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(RewardMode::Fixed),
            "gail" => Ok(RewardMode::Gail),
            other => Err(Error::Config(format!("unknown reward_mode '{other}' (expected fixed or gail)"))),
        }
    }
}

/// Run configuration. The numeric defaults are the experiment settings
/// (discount 0.01, hidden 256, embeddings 200/100/200, rewards ±1,
/// ε 0.1, dropout 0.05, learning rate 0.001 for every Adam instance);
/// `dim_action`, `checkpoint_every` and `disc_batch_sentences` are this
/// artifact's own knobs.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub gamma: f64,
    pub hidden: usize,
    pub dim_surface: usize,
    pub dim_pos: usize,
    pub dim_pretrained: usize,
    pub dim_action: usize,
    pub fixed_reward_correct: f64,
    pub fixed_reward_wrong: f64,
    pub epsilon: f64,
    pub dropout: f64,
    pub lr: f64,
    pub entropy_weight: f64,
    pub reward_mode: RewardMode,
    pub labeling_schema: LabelingSchema,
    pub entity_mode: EntityMode,
    pub epochs: usize,
    pub seed: u64,
    pub checkpoint_every: usize,
    pub disc_batch_sentences: usize,
    pub embeddings_path: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.01,
            hidden: 256,
            dim_surface: 200,
            dim_pos: 100,
            dim_pretrained: 200,
            dim_action: 64,
            fixed_reward_correct: 1.0,
            fixed_reward_wrong: -1.0,
            epsilon: 0.1,
            dropout: 0.05,
            lr: 0.001,
            entropy_weight: 0.01,
            reward_mode: RewardMode::Gail,
            labeling_schema: LabelingSchema::TriggersAndEntities,
            entity_mode: EntityMode::GoldEntities,
            epochs: 30,
            seed: 42,
            checkpoint_every: 10,
            disc_batch_sentences: 8,
            embeddings_path: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Config(format!("bad value '{value}' for config key '{key}'")))
}

impl TrainConfig {
    /// Applies one `key = value` override; unknown keys are rejected by
    /// name.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "gamma" => self.gamma = parse_num(key, value)?,
            "hidden" => self.hidden = parse_num(key, value)?,
            "dim_surface" => self.dim_surface = parse_num(key, value)?,
            "dim_pos" => self.dim_pos = parse_num(key, value)?,
            "dim_pretrained" => self.dim_pretrained = parse_num(key, value)?,
            "dim_action" => self.dim_action = parse_num(key, value)?,
            "fixed_reward_correct" => self.fixed_reward_correct = parse_num(key, value)?,
            "fixed_reward_wrong" => self.fixed_reward_wrong = parse_num(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "dropout" => self.dropout = parse_num(key, value)?,
            "lr" => self.lr = parse_num(key, value)?,
            "entropy_weight" => self.entropy_weight = parse_num(key, value)?,
            "reward_mode" => self.reward_mode = RewardMode::parse(value)?,
            "labeling_schema" => self.labeling_schema = LabelingSchema::parse(value)?,
            "entity_mode" => self.entity_mode = EntityMode::parse(value)?,
            "epochs" => self.epochs = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "checkpoint_every" => self.checkpoint_every = parse_num(key, value)?,
            "disc_batch_sentences" => self.disc_batch_sentences = parse_num(key, value)?,
            "embeddings" => self.embeddings_path = Some(value.to_string()),
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Reads a plain-text `key = value` config file over the defaults.
    /// `#`-prefixed lines and blank lines are ignored.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("expected key=value, got '{line}'"),
            })?;
            self.apply_kv(key.trim(), value.trim()).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn model_dims(&self) -> ModelDims {
        ModelDims {
            hidden: self.hidden,
            dim_surface: self.dim_surface,
            dim_pos: self.dim_pos,
            dim_action: self.dim_action,
            dropout: self.dropout,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lr <= 0.0 {
            return Err(Error::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must be in [0, 1), got {}", self.epsilon)));
        }
        if !(0.0..=1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout must be in [0, 1], got {}", self.dropout)));
        }
        if self.fixed_reward_correct <= self.fixed_reward_wrong {
            return Err(Error::Config("fixed_reward_correct must exceed fixed_reward_wrong".into()));
        }
        if self.disc_batch_sentences == 0 {
            return Err(Error::Config("disc_batch_sentences must be positive".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::Config("checkpoint_every must be positive".into()));
        }
        Ok(())
    }
}
