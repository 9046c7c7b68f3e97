use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Diffusion recommender training and fairness evaluation.
///
/// Any config key can also be given as a flag (`--w_max 2.5` or
/// `--w_max=2.5`); flags override the `--config` file.
#[derive(Debug, Parser)]
#[command(name = "fairdiff", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Random seed (overrides the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also print aligned text tables.
    #[arg(long)]
    pub pretty: bool,
    /// Skip the tuned hyperparameter ranges (structural checks still apply).
    #[arg(long = "unsafe-ranges")]
    pub unsafe_ranges: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a dataset directory from raw events or the synthetic generator.
    Prepare {
        #[command(flatten)]
        common: Common,
        /// Raw `user item timestamp [weight]` file.
        #[arg(long, required_unless_present = "synthetic")]
        input: Option<PathBuf>,
        /// Generate a clustered Zipf dataset instead of reading one.
        #[arg(long)]
        synthetic: bool,
    },
    /// Train a diffrec, ag or a2g model.
    Train {
        #[command(flatten)]
        common: Common,
        /// Prepared dataset directory.
        #[arg(long)]
        data: PathBuf,
        /// Weak checkpoint to guide with instead of one from a fresh DiffRec run.
        #[arg(long)]
        weak: Option<PathBuf>,
    },
    /// Compute accuracy and fairness metrics for checkpoints and baselines.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// `[NAME=]PATH`, repeatable.
        #[arg(long = "checkpoint")]
        checkpoints: Vec<String>,
    },
    /// Train the ablation variants and report them against DiffRec.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated subset of no_d1,no_d2,no_d3,no_tail_bonus,no_ag,no_pop.
        #[arg(long, value_delimiter = ',')]
        variants: Option<Vec<String>>,
        /// Cutoff of the report.
        #[arg(long, default_value_t = 50)]
        k: usize,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Prepare { common, .. }
            | Command::Train { common, .. }
            | Command::Evaluate { common, .. }
            | Command::Ablate { common, .. } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Prepare { .. } => "prepare",
            Command::Train { .. } => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::Ablate { .. } => "ablate",
        }
    }
}

/// A `--key value` pair taken out of argv because `key` is a config key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Override {
    pub key: String,
    pub value: String,
}

/// Removes `--key value` / `--key=value` for every `key` in `keys`
/// (dashes and underscores are interchangeable), returning the remaining
/// argv and the overrides in order.
pub fn split_overrides(argv: &[String], keys: &[&str]) -> Result<(Vec<String>, Vec<Override>), String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut overrides = Vec::new();
    let mut i = 0;
    while i < argv.len() {
        let arg = &argv[i];
        if let Some(flag) = arg.strip_prefix("--") {
            let (name, inline) = match flag.split_once('=') {
                Some((n, v)) => (n, Some(v.to_string())),
                None => (flag, None),
            };
            let key = name.replace('-', "_");
            if keys.contains(&key.as_str()) {
                let value = match inline {
                    Some(v) => v,
                    None => {
                        i += 1;
                        argv.get(i).cloned().ok_or_else(|| format!("--{name} needs a value"))?
                    }
                };
                overrides.push(Override { key, value });
                i += 1;
                continue;
            }
        }
        rest.push(arg.clone());
        i += 1;
    }
    Ok((rest, overrides))
}
