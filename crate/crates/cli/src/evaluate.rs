use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fairdiff::data::{InteractionDataset, PopularityProfile, Split, DEFAULT_PRIOR};
use fairdiff::metrics::{
    evaluate_lists, mostpop_list, random_list, tradeoff, Direction, MetricsReport, RankedUsers, CUTOFFS,
};
use fairdiff::numerics::SeededRng;
use fairdiff::trainer::{evaluate_checkpoint, kv_lines, Checkpoint};
use fairdiff::{Error, Result};

use crate::args::Override;
use crate::manifest::{dataset_hash, write_file, Manifest};
use crate::table::{fmt_value, render, render_tsv};
use crate::train::load_data;

pub const EVAL_KEYS: [&str; 5] = ["seed", "k", "baselines", "split", "tradeoff"];

/// Fairness metrics that get a trade-off value, with their direction.
pub const TRADEOFF_METRICS: [(&str, Direction); 4] = [
    ("Gini", Direction::LowerIsBetter),
    ("APLT", Direction::HigherIsBetter),
    ("DeltaExp", Direction::LowerIsBetter),
    ("Cov", Direction::HigherIsBetter),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Random,
    MostPop,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Random => "random",
            Baseline::MostPop => "mostpop",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub seed: u64,
    pub cutoffs: Vec<usize>,
    pub baselines: Vec<Baseline>,
    pub split: Split,
    pub tradeoff: Option<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { seed: 2024, cutoffs: CUTOFFS.to_vec(), baselines: Vec::new(), split: Split::Test, tradeoff: None }
    }
}

impl EvalConfig {
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let bad = |message: String| Error::Config { key: key.into(), line, message };
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad(format!("cannot parse `{value}`")))?,
            "k" => {
                let ks: Vec<usize> = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| bad(format!("cannot parse `{v}`"))))
                    .collect::<Result<_>>()?;
                if ks.is_empty() || ks.contains(&0) {
                    return Err(bad("cutoffs must be positive".into()));
                }
                self.cutoffs = ks;
            }
            "baselines" => {
                self.baselines = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty() && *v != "none")
                    .map(|v| match v {
                        "random" => Ok(Baseline::Random),
                        "mostpop" => Ok(Baseline::MostPop),
                        _ => Err(bad(format!("unknown baseline `{v}` (expected random, mostpop)"))),
                    })
                    .collect::<Result<_>>()?;
            }
            "split" => {
                self.split = match value {
                    "test" => Split::Test,
                    "val" => Split::Val,
                    _ => return Err(bad(format!("expected test or val, got `{value}`"))),
                }
            }
            "tradeoff" => self.tradeoff = if value == "none" { None } else { Some(value.to_string()) },
            _ => return Err(bad(format!("unknown key (valid keys: {})", EVAL_KEYS.join(", ")))),
        }
        Ok(())
    }

    pub fn resolve(text: Option<&str>, overrides: &[Override]) -> Result<Self> {
        let mut c = EvalConfig::default();
        if let Some(t) = text {
            for e in kv_lines(t)? {
                c.set(&e.key, &e.value, e.line)?;
            }
        }
        for o in overrides {
            c.set(&o.key, &o.value, 0)?;
        }
        Ok(c)
    }

    pub fn to_kv(&self) -> String {
        let ks: Vec<String> = self.cutoffs.iter().map(ToString::to_string).collect();
        let bs: Vec<&str> = self.baselines.iter().map(|b| b.name()).collect();
        format!(
            "seed={}\nk={}\nbaselines={}\nsplit={}\ntradeoff={}\n",
            self.seed,
            ks.join(","),
            if bs.is_empty() { "none".into() } else { bs.join(",") },
            if self.split == Split::Test { "test" } else { "val" },
            self.tradeoff.as_deref().unwrap_or("none")
        )
    }
}

/// Reference recommenders ranked for every user with targets in `split`.
pub fn baseline_lists(
    which: Baseline,
    ds: &InteractionDataset,
    split: Split,
    k: usize,
    seed: u64,
) -> RankedUsers {
    let users = ds.evaluable_users(split);
    let counts = ds.train_counts();
    let lists = users
        .iter()
        .map(|&u| {
            let mask = ds.seen_mask(u, split);
            match which {
                Baseline::Random => random_list(&mut SeededRng::derive(seed, u as u64), &mask, k),
                Baseline::MostPop => mostpop_list(&counts, &mask, k),
            }
        })
        .collect();
    RankedUsers { users, lists }
}

pub fn baseline_report(
    which: Baseline,
    ds: &InteractionDataset,
    profile: &PopularityProfile,
    cfg: &EvalConfig,
) -> Result<MetricsReport> {
    let k = cfg.cutoffs.iter().copied().max().unwrap_or(1);
    let ranked = baseline_lists(which, ds, cfg.split, k, cfg.seed);
    evaluate_lists(which.name(), ds, cfg.split, &ranked, &profile.tail, &cfg.cutoffs)
}

/// `model, K, metric, baseline, value, zero_accuracy_loss` rows of every
/// report against `baseline`.
pub fn tradeoff_tsv(reports: &[MetricsReport], baseline: &str) -> Result<String> {
    let base = reports
        .iter()
        .find(|r| r.model == baseline)
        .ok_or_else(|| Error::Config { key: "tradeoff".into(), line: 0, message: format!("no model named `{baseline}`") })?;
    let mut s = String::from("model\tK\tmetric\tbaseline\tvalue\tzero_accuracy_loss\n");
    for r in reports.iter().filter(|r| r.model != baseline) {
        for c in &r.cutoffs {
            let Some(b) = base.cutoff(c.k) else { continue };
            for (metric, dir) in TRADEOFF_METRICS {
                let (bm, mm) = (b.get(metric).unwrap_or(f64::NAN), c.get(metric).unwrap_or(f64::NAN));
                let (value, flag) = match tradeoff(dir, bm, mm, b.ndcg, c.ndcg) {
                    Ok(t) => (fmt_value(t.value), t.zero_accuracy_loss.to_string()),
                    Err(_) => ("NA".to_string(), "NA".to_string()),
                };
                let _ = writeln!(s, "{}\t{}\tT_{}\t{}\t{}\t{}", r.model, c.k, metric, baseline, value, flag);
            }
        }
    }
    Ok(s)
}

/// Metric-per-column view of the reports.
pub fn pretty_reports(reports: &[MetricsReport]) -> String {
    let header = ["model", "K", "NDCG", "Recall", "APLT", "DeltaExp", "Gini", "Cov"];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .flat_map(|r| {
            r.cutoffs.iter().map(move |c| {
                let mut row = vec![r.model.clone(), c.k.to_string()];
                row.extend(header[2..].iter().map(|m| format!("{:.4}", c.get(m).unwrap_or(f64::NAN))));
                row
            })
        })
        .collect();
    render(&header, &rows)
}

fn parse_checkpoint_arg(arg: &str) -> (Option<String>, PathBuf) {
    match arg.split_once('=') {
        Some((name, path)) if !name.is_empty() && !name.contains('/') => (Some(name.to_string()), PathBuf::from(path)),
        _ => (None, PathBuf::from(arg)),
    }
}

pub fn run(
    cfg: &EvalConfig,
    data: &Path,
    checkpoints: &[String],
    out: &Path,
    pretty: bool,
    mut manifest: Manifest,
) -> Result<()> {
    manifest.push("input.data", data.display());
    manifest.push("input.dataset_sha256", dataset_hash(data)?);
    for c in checkpoints {
        manifest.push("input.checkpoint", c);
    }
    manifest.push("output", out.display());
    manifest.push_config("config", &cfg.to_kv());
    manifest.write(out)?;

    if checkpoints.is_empty() && cfg.baselines.is_empty() {
        return Err(Error::Config {
            key: "checkpoint".into(),
            line: 0,
            message: "nothing to evaluate: give --checkpoint or --baselines".into(),
        });
    }
    let (ds, profile) = load_data(data, DEFAULT_PRIOR)?;
    let mut reports = Vec::new();
    for b in &cfg.baselines {
        reports.push(baseline_report(*b, &ds, &profile, cfg)?);
    }
    for arg in checkpoints {
        let (name, path) = parse_checkpoint_arg(arg);
        let ckpt = Checkpoint::load(&path)?;
        let mut name = name.unwrap_or_else(|| ckpt.config.model.name().to_string());
        if reports.iter().any(|r: &MetricsReport| r.model == name) {
            name = format!("{name}_{}", reports.len());
        }
        reports.push(evaluate_checkpoint(&name, &ds, &ckpt, &profile.tail, cfg.split, &cfg.cutoffs, cfg.seed)?);
    }

    let mut metrics = MetricsReport::tsv_header().to_string();
    let mut per_user = MetricsReport::per_user_header().to_string();
    for r in &reports {
        metrics += &r.tsv_rows();
        per_user += &r.per_user_rows(&ds.users);
    }
    write_file(out, "metrics.tsv", &metrics)?;
    write_file(out, "per_user.tsv", &per_user)?;
    let tradeoffs = cfg.tradeoff.as_deref().map(|b| tradeoff_tsv(&reports, b)).transpose()?;
    if let Some(t) = &tradeoffs {
        write_file(out, "tradeoff.tsv", t)?;
    }
    if pretty {
        print!("{}", pretty_reports(&reports));
        if let Some(t) = &tradeoffs {
            println!();
            print!("{}", render_tsv(t));
        }
    }
    Ok(())
}
