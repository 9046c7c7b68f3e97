use std::time::Instant;

use super::checkpoint::Checkpoint;
use super::config::{ModelKind, TrainConfig};
use super::early_stop::early_stop;
use super::objective::{joint_objective, Frozen, JointBatch, JointSettings, WeightSource};
use super::scoring::{schedule_for, Scorer};
use crate::data::{InteractionDataset, PopularityProfile, Split};
use crate::diffusion::{base_loss, draw_batch, Denoiser, Role};
use crate::error::{Error, ErrorCategory, Result};
use crate::fairness::target_distribution;
use crate::guidance::{GuidanceNet, TailScaling};
use crate::metrics::mean_recall;
use crate::numerics::{AdamConfig, AdamState, DenseNet, SeededRng};

/// Checkpoints are kept for every epoch up to this one (weak candidates).
pub const MAX_WEAK_EPOCH: usize = 10;
pub const VALIDATION_K: usize = 20;

const STREAM_INIT: u64 = 1;
const STREAM_BATCHES: u64 = 2;
const STREAM_VALIDATION: u64 = 3;
const STREAM_AAN_INIT: u64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub l_base: f64,
    pub l_ag: f64,
    pub l_pop: f64,
    pub recall20: f64,
    pub wall_secs: f64,
}

impl EpochLog {
    pub const TSV_HEADER: &'static str = "epoch\tL_base\tL_AG\tL_pop\tRecall@20\twall_s\n";

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.3}\n",
            self.epoch, self.l_base, self.l_ag, self.l_pop, self.recall20, self.wall_secs
        )
    }
}

/// Per-step instrumentation of joint training.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub epoch: usize,
    pub step: usize,
    pub total: f64,
    pub base: f64,
    pub ag: f64,
    pub pop: f64,
    /// `λ_pop · L_pop` as it entered the total.
    pub pop_contribution: f64,
    /// `[over_high, under_low, balance]` parts of `pop`.
    pub pop_terms: [f64; 3],
    pub mean_w: f64,
    /// Largest `|d₁|` fed into the AAN in this step, per signal.
    pub max_abs_fed: [f64; 3],
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// Checkpoint of the best validation epoch.
    pub best: Checkpoint,
    /// Checkpoints after epochs `1..=min(MAX_WEAK_EPOCH, trained)`.
    pub epoch_checkpoints: Vec<Checkpoint>,
    pub log: Vec<EpochLog>,
    pub steps: Vec<StepRecord>,
    /// Set when training diverged; `best` is then the last good state.
    pub aborted: Option<Error>,
}

impl TrainOutcome {
    /// The checkpoint after epoch `e` (1-based), used as a weak model.
    pub fn weak_checkpoint(&self, e: usize) -> Result<&Checkpoint> {
        self.epoch_checkpoints.get(e.wrapping_sub(1)).ok_or_else(|| {
            Error::Incompatible(format!(
                "no checkpoint for epoch {e}; {} epoch checkpoints were kept",
                self.epoch_checkpoints.len()
            ))
        })
    }
}

fn is_divergence(e: &Error) -> bool {
    e.category() == ErrorCategory::Divergence
}

fn training_users(ds: &InteractionDataset) -> Vec<usize> {
    (0..ds.n_users()).filter(|&u| !ds.train[u].is_empty()).collect()
}

fn validation_recall(ds: &InteractionDataset, scorer: &Scorer, seed: u64) -> Result<f64> {
    if ds.evaluable_users(Split::Val).is_empty() {
        return Ok(0.0);
    }
    let ranked = scorer.rank(ds, Split::Val, VALIDATION_K, seed)?;
    Ok(mean_recall(ds, Split::Val, &ranked, VALIDATION_K))
}

fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    SeededRng::derive(seed, STREAM_VALIDATION ^ ((epoch as u64) << 8)).next_u64()
}

/// Trains the unguided denoiser on `L_base`, keeping early checkpoints and
/// selecting the final model by validation Recall@20.
pub fn train_diffrec(
    ds: &InteractionDataset,
    profile: &PopularityProfile,
    cfg: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochLog),
) -> Result<TrainOutcome> {
    let schedule = schedule_for(cfg)?;
    let mut init_rng = SeededRng::derive(cfg.seed, STREAM_INIT);
    let mut model = Denoiser::<f32>::new(ds.n_items(), &cfg.hidden, cfg.emb_dim, &mut init_rng)?;
    let mut adam = AdamState::new(&model.net, AdamConfig { lr: cfg.lr, ..AdamConfig::default() });
    let mut rng = SeededRng::derive(cfg.seed, STREAM_BATCHES);
    let mut users = training_users(ds);
    if users.is_empty() {
        return Err(Error::EmptyDataset("no user has training interactions".into()));
    }
    let diffrec_cfg = TrainConfig { model: ModelKind::DiffRec, ..cfg.clone() };
    let snapshot = |net: &DenseNet<f32>, epoch: usize, hist: &[f64]| Checkpoint {
        config: diffrec_cfg.clone(),
        epoch: epoch as u32,
        main: net.clone(),
        weak: None,
        aan: None,
        running_mean: 0.0,
        running_std: 1.0,
        val_history: hist.to_vec(),
    };

    let mut history = Vec::new();
    let mut log = Vec::new();
    let mut epoch_checkpoints = Vec::new();
    let mut best = snapshot(&model.net, 0, &history);
    let mut aborted = None;
    'epochs: for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        rng.shuffle(&mut users);
        let mut sum = 0.0;
        let mut batches = 0usize;
        for chunk in users.chunks(cfg.batch_size) {
            let x0: Vec<Vec<f32>> = chunk.iter().map(|&u| ds.vector(u, Split::Train)).collect();
            let step = base_loss(&model, &x0, &mut rng, &schedule)
                .and_then(|(loss, grads)| adam.update(&mut model.net, &grads).map(|_| loss));
            match step {
                Ok(loss) => {
                    sum += loss as f64;
                    batches += 1;
                }
                Err(e) if is_divergence(&e) => {
                    aborted = Some(e);
                    break 'epochs;
                }
                Err(e) => return Err(e),
            }
        }
        let scorer = Scorer::from_checkpoint(&snapshot(&model.net, epoch, &history), &profile.tail)?;
        let recall = validation_recall(ds, &scorer, epoch_seed(cfg.seed, epoch))?;
        history.push(recall);
        let entry = EpochLog {
            epoch,
            l_base: sum / batches.max(1) as f64,
            l_ag: 0.0,
            l_pop: 0.0,
            recall20: recall,
            wall_secs: start.elapsed().as_secs_f64(),
        };
        on_epoch(&entry);
        log.push(entry);
        let ckpt = snapshot(&model.net, epoch, &history);
        if epoch <= MAX_WEAK_EPOCH {
            epoch_checkpoints.push(ckpt.clone());
        }
        let decision = early_stop(&history, cfg.patience);
        if decision.best_epoch == epoch {
            best = ckpt;
        }
        best.val_history = history.clone();
        if decision.stop {
            break;
        }
    }
    Ok(TrainOutcome { best, epoch_checkpoints, log, steps: Vec::new(), aborted })
}

fn same_shape(a: &DenseNet<f32>, b: &DenseNet<f32>) -> bool {
    a.layers().len() == b.layers().len()
        && a.layers().iter().zip(b.layers()).all(|(x, y)| x.in_dim() == y.in_dim() && x.out_dim() == y.out_dim())
}

/// Joint training of the main denoiser and the guidance network against a
/// frozen weak model. The main model starts from the same initialization
/// as [`train_diffrec`] with this config.
pub fn train_joint(
    ds: &InteractionDataset,
    profile: &PopularityProfile,
    cfg: &TrainConfig,
    weak_ckpt: &Checkpoint,
    on_epoch: &mut dyn FnMut(&EpochLog),
) -> Result<TrainOutcome> {
    if weak_ckpt.n_items() != ds.n_items() {
        return Err(Error::Incompatible(format!(
            "weak checkpoint scores {} items but the dataset has {}",
            weak_ckpt.n_items(),
            ds.n_items()
        )));
    }
    let schedule = schedule_for(cfg)?;
    let mut init_rng = SeededRng::derive(cfg.seed, STREAM_INIT);
    let mut main = Denoiser::<f32>::new(ds.n_items(), &cfg.hidden, cfg.emb_dim, &mut init_rng)?;
    if !same_shape(&main.net, &weak_ckpt.main) {
        return Err(Error::Incompatible(
            "weak checkpoint architecture does not match hidden/emb_dim in the config".into(),
        ));
    }
    let weak = Denoiser::from_net(weak_ckpt.main.clone(), cfg.emb_dim, Role::Weak);
    let mut aan_rng = SeededRng::derive(cfg.seed, STREAM_AAN_INIT);
    let mut aan = GuidanceNet::<f32>::new(ds.n_items(), &cfg.aan_hidden, &cfg.guidance_hyper(), &mut aan_rng)?;
    let learned = cfg.constant_w.is_none();
    let adam_cfg = AdamConfig { lr: cfg.lr, ..AdamConfig::default() };
    let mut main_adam = AdamState::new(&main.net, adam_cfg);
    let mut aan_adam = AdamState::new(&aan.net, adam_cfg);
    let settings = JointSettings {
        lambda_ag: cfg.lambda_ag as f32,
        lambda_pop: cfg.lambda_pop as f32,
        pop_k: cfg.pop_k,
        tau_pop: cfg.tau_pop as f32,
    };
    let bins = &profile.bins;
    let tail = &profile.tail;
    let mut rng = SeededRng::derive(cfg.seed, STREAM_BATCHES);
    let mut users = training_users(ds);
    if users.is_empty() {
        return Err(Error::EmptyDataset("no user has training interactions".into()));
    }
    let a2g_cfg = TrainConfig { model: ModelKind::A2g, ..cfg.clone() };
    let snapshot = |main: &Denoiser<f32>, aan: &GuidanceNet<f32>, epoch: usize, hist: &[f64]| Checkpoint {
        config: a2g_cfg.clone(),
        epoch: epoch as u32,
        main: main.net.clone(),
        weak: Some(weak.net.clone()),
        aan: Some(aan.net.clone()),
        running_mean: aan.running_mean,
        running_std: aan.running_std,
        val_history: hist.to_vec(),
    };

    let mut history = Vec::new();
    let mut log = Vec::new();
    let mut steps = Vec::new();
    let mut epoch_checkpoints = Vec::new();
    let mut best = snapshot(&main, &aan, 0, &history);
    let mut halved = false;
    let mut aborted = None;
    let mut step_no = 0usize;
    'epochs: for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        rng.shuffle(&mut users);
        let (mut sb, mut sa, mut sp, mut n) = (0.0, 0.0, 0.0, 0usize);
        for chunk in users.chunks(cfg.batch_size) {
            let x0: Vec<Vec<f32>> = chunk.iter().map(|&u| ds.vector(u, Split::Train)).collect();
            let draws = draw_batch(&mut rng, x0.len(), ds.n_items(), &schedule);
            let hists: Vec<[f64; 3]> = chunk.iter().filter_map(|&u| profile.history[u]).collect();
            let target = target_distribution(&hists, cfg.prior())?;
            let batch = JointBatch { x0: &x0, draws: &draws, tail, bins, target: &target };
            let source = match cfg.constant_w {
                Some(w) => WeightSource::Constant(w as f32),
                None => WeightSource::Learned(&aan),
            };
            let step = joint_objective(&main, &weak, source, &batch, &schedule, &settings, &Frozen::default())
                .and_then(|eval| {
                    if let Some(layer) = eval.main_grads.first_non_finite_layer() {
                        return Err(Error::Divergence { layer });
                    }
                    if let Some(layer) = eval.aan_grads.as_ref().and_then(|g| g.first_non_finite_layer()) {
                        return Err(Error::Divergence { layer });
                    }
                    Ok(eval)
                });
            let eval = match step {
                Ok(e) => e,
                Err(e) if is_divergence(&e) && !halved => {
                    halved = true;
                    main_adam.config.lr *= 0.5;
                    aan_adam.config.lr *= 0.5;
                    continue;
                }
                Err(e) if is_divergence(&e) => {
                    aborted = Some(e);
                    break 'epochs;
                }
                Err(e) => return Err(e),
            };
            main_adam.update(&mut main.net, &eval.main_grads)?;
            if learned {
                if let Some(g) = &eval.aan_grads {
                    aan_adam.update(&mut aan.net, g)?;
                }
                if matches!(eval.scaling, TailScaling::Standardized { .. }) {
                    aan.update_running(&eval.scaling);
                }
            }
            step_no += 1;
            let mut max_abs_fed = [0.0f64; 3];
            for row in &eval.fed {
                for c in 0..3 {
                    max_abs_fed[c] = max_abs_fed[c].max((row[c] as f64).abs());
                }
            }
            steps.push(StepRecord {
                epoch,
                step: step_no,
                total: eval.total as f64,
                base: eval.base as f64,
                ag: eval.ag as f64,
                pop: eval.pop as f64,
                pop_contribution: (settings.lambda_pop * eval.pop) as f64,
                pop_terms: eval.pop_terms.map(|v| v as f64),
                mean_w: eval.weights.iter().map(|&w| w as f64).sum::<f64>() / eval.weights.len() as f64,
                max_abs_fed,
            });
            sb += eval.base as f64;
            sa += eval.ag as f64;
            sp += eval.pop as f64;
            n += 1;
        }
        let ckpt = snapshot(&main, &aan, epoch, &history);
        let scorer = Scorer::from_checkpoint(&ckpt, tail)?;
        let recall = validation_recall(ds, &scorer, epoch_seed(cfg.seed, epoch))?;
        history.push(recall);
        let nf = n.max(1) as f64;
        let entry = EpochLog {
            epoch,
            l_base: sb / nf,
            l_ag: sa / nf,
            l_pop: sp / nf,
            recall20: recall,
            wall_secs: start.elapsed().as_secs_f64(),
        };
        on_epoch(&entry);
        log.push(entry);
        let ckpt = snapshot(&main, &aan, epoch, &history);
        if epoch <= MAX_WEAK_EPOCH {
            epoch_checkpoints.push(ckpt.clone());
        }
        let decision = early_stop(&history, cfg.patience);
        if decision.best_epoch == epoch {
            best = ckpt;
        }
        best.val_history = history.clone();
        if decision.stop {
            break;
        }
    }
    Ok(TrainOutcome { best, epoch_checkpoints, log, steps, aborted })
}
