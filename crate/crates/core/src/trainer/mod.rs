//! Configuration, checkpoints, and the DiffRec and joint training loops.

mod checkpoint;
mod config;
mod early_stop;
mod objective;
mod scoring;
mod train;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION, MAGIC};
pub use config::{kv_lines, KvEntry, ModelKind, TrainConfig, CONFIG_KEYS};
pub use early_stop::{early_stop, StopDecision};
pub use objective::{joint_objective, Frozen, JointBatch, JointEval, JointSettings, WeightSource};
pub use scoring::{evaluate_checkpoint, history_vector, sampler_options, schedule_for, Scorer, WeightKind};
pub use train::{train_diffrec, train_joint, EpochLog, StepRecord, TrainOutcome, MAX_WEAK_EPOCH, VALIDATION_K};
