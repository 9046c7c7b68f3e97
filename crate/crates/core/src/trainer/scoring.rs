use super::checkpoint::Checkpoint;
use super::config::{ModelKind, TrainConfig};
use crate::data::{InteractionDataset, Split};
use crate::diffusion::{build_schedule, sample_unguided, ChainInit, Denoiser, DiffusionSchedule, SamplerOptions};
use crate::error::{Error, Result};
use crate::guidance::{guided_sample, ConstantWeight, GuidanceNet, GuidanceWeight};
use crate::metrics::{evaluate_lists, rank_users, MetricsReport, RankedUsers};
use crate::numerics::SeededRng;

pub fn schedule_for(cfg: &TrainConfig) -> Result<DiffusionSchedule<f32>> {
    build_schedule(cfg.steps, cfg.infer_steps, cfg.noise_scale * cfg.noise_min, cfg.noise_scale * cfg.noise_max)
}

pub fn sampler_options(cfg: &TrainConfig) -> SamplerOptions {
    SamplerOptions {
        init: if cfg.pure_noise_init { ChainInit::PureNoise } else { ChainInit::CorruptedHistory },
        stochastic: cfg.sampling_noise,
        blowup_limit: None,
    }
}

/// Input history for ranking against `target`: train items for validation,
/// train and validation items for test.
pub fn history_vector(ds: &InteractionDataset, u: usize, target: Split) -> Vec<f32> {
    let mask = ds.seen_mask(u, target);
    if target == Split::Train {
        return ds.vector(u, Split::Train);
    }
    mask.into_iter().map(|m| if m { 1.0 } else { 0.0 }).collect()
}

#[derive(Debug, Clone)]
pub enum WeightKind {
    Unguided,
    Constant(f32),
    Learned(GuidanceNet<f32>),
}

/// A trained model ready to produce item scores from a history vector.
#[derive(Debug, Clone)]
pub struct Scorer {
    pub main: Denoiser<f32>,
    pub weak: Option<Denoiser<f32>>,
    pub weight: WeightKind,
    pub schedule: DiffusionSchedule<f32>,
    pub options: SamplerOptions,
    pub tail: Vec<bool>,
}

impl Scorer {
    pub fn from_checkpoint(ckpt: &Checkpoint, tail: &[bool]) -> Result<Self> {
        let cfg = &ckpt.config;
        let weak = ckpt.weak_denoiser();
        let weight = match cfg.model {
            ModelKind::DiffRec => WeightKind::Unguided,
            ModelKind::Ag => WeightKind::Constant(cfg.ag_weight as f32),
            ModelKind::A2g => match cfg.constant_w {
                Some(w) => WeightKind::Constant(w as f32),
                None => WeightKind::Learned(
                    ckpt.guidance()?.ok_or_else(|| Error::Incompatible("a2g checkpoint lacks a guidance network".into()))?,
                ),
            },
        };
        if !matches!(weight, WeightKind::Unguided) && weak.is_none() {
            return Err(Error::Incompatible(format!("{} checkpoint lacks a weak model", cfg.model.name())));
        }
        if tail.len() != ckpt.n_items() {
            return Err(Error::Incompatible(format!(
                "checkpoint scores {} items but the dataset has {}",
                ckpt.n_items(),
                tail.len()
            )));
        }
        Ok(Scorer {
            main: ckpt.main_denoiser(),
            weak,
            weight,
            schedule: schedule_for(cfg)?,
            options: sampler_options(cfg),
            tail: tail.to_vec(),
        })
    }

    pub fn score(&self, history: &[f32], rng: &mut SeededRng) -> Result<Vec<f32>> {
        let weak = || self.weak.as_ref().expect("guided scorer has a weak model");
        let w: &dyn GuidanceWeight<f32> = match &self.weight {
            WeightKind::Unguided => return sample_unguided(&self.main, history, &self.schedule, &self.options, rng),
            WeightKind::Constant(w) => &ConstantWeight(*w),
            WeightKind::Learned(g) => g,
        };
        guided_sample(&self.main, weak(), w, history, &self.schedule, &self.tail, &self.options, rng)
    }

    /// Top-`k` lists for every user with `target` items.
    pub fn rank(&self, ds: &InteractionDataset, target: Split, k: usize, seed: u64) -> Result<RankedUsers> {
        rank_users(ds, target, k, seed, |u, rng| self.score(&history_vector(ds, u, target), rng))
    }
}

/// Metrics at `cutoffs` for a checkpoint on the `target` split.
pub fn evaluate_checkpoint(
    name: &str,
    ds: &InteractionDataset,
    ckpt: &Checkpoint,
    tail: &[bool],
    target: Split,
    cutoffs: &[usize],
    seed: u64,
) -> Result<MetricsReport> {
    if ckpt.n_items() != ds.n_items() {
        return Err(Error::Incompatible(format!(
            "checkpoint scores {} items but the dataset has {}",
            ckpt.n_items(),
            ds.n_items()
        )));
    }
    let scorer = Scorer::from_checkpoint(ckpt, tail)?;
    let k = cutoffs.iter().copied().max().unwrap_or(0);
    let ranked = scorer.rank(ds, target, k, seed)?;
    evaluate_lists(name, ds, target, &ranked, tail, cutoffs)
}
