use std::fmt::Write as _;
use std::path::Path;

use fairdiff::data::{read_dataset, InteractionDataset, PopularityProfile};
use fairdiff::trainer::{train_diffrec, train_joint, Checkpoint, EpochLog, ModelKind, StepRecord, TrainConfig, TrainOutcome};
use fairdiff::{Error, Result};

use crate::manifest::{dataset_hash, write_file, Manifest};

pub fn load_data(dir: &Path, prior: [f64; 3]) -> Result<(InteractionDataset, PopularityProfile)> {
    let ds = read_dataset(dir)?;
    let profile = PopularityProfile::build(&ds, prior)?;
    Ok((ds, profile))
}

pub fn log_tsv(log: &[EpochLog]) -> String {
    let mut s = EpochLog::TSV_HEADER.to_string();
    for e in log {
        s += &e.tsv_row();
    }
    s
}

pub fn steps_tsv(steps: &[StepRecord]) -> String {
    let mut s = String::from(
        "step\tepoch\ttotal\tL_base\tL_AG\tL_pop\tpop_contribution\tover_high\tunder_low\tbalance\tmean_w\tmax_fed_d1\tmax_fed_d2\tmax_fed_d3\n",
    );
    for r in steps {
        let _ = writeln!(
            s,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            r.step,
            r.epoch,
            r.total,
            r.base,
            r.ag,
            r.pop,
            r.pop_contribution,
            r.pop_terms[0],
            r.pop_terms[1],
            r.pop_terms[2],
            r.mean_w,
            r.max_abs_fed[0],
            r.max_abs_fed[1],
            r.max_abs_fed[2]
        );
    }
    s
}

fn progress(tag: &str) -> impl FnMut(&EpochLog) + '_ {
    move |e: &EpochLog| {
        eprintln!(
            "[{tag}] epoch {:>3}  L_base {:.4}  L_AG {:.4}  L_pop {:.4}  Recall@20 {:.4}",
            e.epoch, e.l_base, e.l_ag, e.l_pop, e.recall20
        )
    }
}

fn finish(outcome: &TrainOutcome, dir: &Path, name: &str) -> Result<()> {
    write_file(dir, "train_log.tsv", &log_tsv(&outcome.log))?;
    if !outcome.steps.is_empty() {
        write_file(dir, "steps.tsv", &steps_tsv(&outcome.steps))?;
    }
    outcome.best.save(&dir.join(name))
}

fn abort_if_diverged(outcome: TrainOutcome) -> Result<TrainOutcome> {
    match outcome.aborted {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}

/// DiffRec run written under `dir` with its early epoch checkpoints.
pub fn run_diffrec(ds: &InteractionDataset, profile: &PopularityProfile, cfg: &TrainConfig, dir: &Path) -> Result<TrainOutcome> {
    let outcome = train_diffrec(ds, profile, cfg, &mut progress("diffrec"))?;
    finish(&outcome, dir, "model.ckpt")?;
    for c in &outcome.epoch_checkpoints {
        c.save(&dir.join(format!("epoch_{:02}.ckpt", c.epoch)))?;
    }
    abort_if_diverged(outcome)
}

pub fn run(cfg: &TrainConfig, data: &Path, weak_path: Option<&Path>, out: &Path, mut manifest: Manifest) -> Result<()> {
    manifest.push("input.data", data.display());
    manifest.push("input.dataset_sha256", dataset_hash(data)?);
    if let Some(w) = weak_path {
        manifest.push("input.weak", w.display());
    }
    manifest.push("output", out.display());
    manifest.push_config("config", &cfg.to_kv());
    manifest.write(out)?;

    let (ds, profile) = load_data(data, cfg.prior())?;
    if cfg.model == ModelKind::DiffRec {
        run_diffrec(&ds, &profile, cfg, out)?;
        return Ok(());
    }

    let external_weak = weak_path.map(Checkpoint::load).transpose()?;
    let diffrec = if cfg.model == ModelKind::Ag || external_weak.is_none() {
        Some(run_diffrec(&ds, &profile, cfg, &out.join("diffrec"))?)
    } else {
        None
    };
    let weak = match (&external_weak, &diffrec) {
        (Some(w), _) => w.clone(),
        (None, Some(d)) => d.weak_checkpoint(cfg.e_weak)?.clone(),
        (None, None) => unreachable!("a DiffRec run provides the weak model"),
    };
    if weak.n_items() != ds.n_items() {
        return Err(Error::Incompatible(format!(
            "weak checkpoint scores {} items but the dataset has {}",
            weak.n_items(),
            ds.n_items()
        )));
    }

    if cfg.model == ModelKind::Ag {
        let base = diffrec.expect("ag trains DiffRec");
        let mut ckpt = base.best.clone();
        ckpt.config = cfg.clone();
        ckpt.weak = Some(weak.main.clone());
        write_file(out, "train_log.tsv", &log_tsv(&base.log))?;
        return ckpt.save(&out.join("model.ckpt"));
    }

    let outcome = train_joint(&ds, &profile, cfg, &weak, &mut progress("a2g"))?;
    finish(&outcome, out, "model.ckpt")?;
    abort_if_diverged(outcome).map(|_| ())
}
