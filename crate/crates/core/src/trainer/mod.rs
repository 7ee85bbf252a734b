//! Epoch orchestration: training passes, the four-task scorer, metric and
//! reward-trace emission, and checkpointing.

mod config;
mod run;
mod score;
mod train;

pub use config::{RewardMode, TrainConfig};
pub use run::{
    build_model, run_training, RewardTraceSpec, RunReport, SplitCorpora, TraceEntry, TraceTask,
    METRICS_HEADER, REWARDS_HEADER,
};
pub use score::{evaluate, score_predictions, score_spans, EpochMetrics, TaskMetrics, TaskRewards};
pub use train::{train_epoch, RewardProvider, TrainStats};
