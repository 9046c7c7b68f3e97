//! Command-line driver: `prepare`, `train`, `evaluate` and `ablate`.

pub mod ablate;
pub mod args;
pub mod evaluate;
pub mod manifest;
pub mod prepare;
pub mod table;
pub mod train;

use std::path::Path;

use clap::Parser;
use fairdiff::trainer::{TrainConfig, CONFIG_KEYS};
use fairdiff::{Error, ErrorCategory, Result};

use args::{split_overrides, Cli, Command, Override};
use evaluate::{EvalConfig, EVAL_KEYS};
use manifest::Manifest;
use prepare::{PrepareConfig, PREPARE_KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;
pub const EXIT_INCOMPATIBLE: i32 = 5;
pub const EXIT_OTHER: i32 = 1;

pub const THREADS_ENV: &str = "FAIRDIFF_THREADS";

/// File-system failures are reported as data errors: they come from
/// missing or unreadable inputs far more often than from the output side.
pub fn exit_code(e: &Error) -> i32 {
    match e.category() {
        ErrorCategory::Config => EXIT_CONFIG,
        ErrorCategory::Data => EXIT_DATA,
        ErrorCategory::Divergence => EXIT_DIVERGENCE,
        ErrorCategory::Incompatible => EXIT_INCOMPATIBLE,
        ErrorCategory::Other if matches!(e, Error::Io { .. } | Error::InvalidInput(_)) => EXIT_DATA,
        ErrorCategory::Other => EXIT_OTHER,
    }
}

fn config_keys(command: &str) -> Vec<&'static str> {
    let keys: &[&'static str] = match command {
        "prepare" => &PREPARE_KEYS,
        "evaluate" => &EVAL_KEYS,
        _ => &CONFIG_KEYS,
    };
    keys.iter().copied().filter(|k| *k != "seed").collect()
}

/// `--baselines` and `--tradeoff` may be given without a value.
fn fill_bare_flags(argv: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(argv.len() + 2);
    for (i, a) in argv.iter().enumerate() {
        out.push(a.clone());
        let bare = argv.get(i + 1).is_none_or(|n| n.starts_with("--"));
        if bare && a == "--baselines" {
            out.push("random,mostpop".into());
        } else if bare && a == "--tradeoff" {
            out.push("diffrec".into());
        }
    }
    out
}

fn read_config(path: Option<&Path>) -> Result<Option<String>> {
    path.map(|p| {
        std::fs::read_to_string(p).map_err(|e| Error::Config {
            key: "config".into(),
            line: 0,
            message: format!("cannot read {}: {e}", p.display()),
        })
    })
    .transpose()
}

fn seed_override(seed: Option<u64>) -> Vec<Override> {
    seed.map(|s| Override { key: "seed".into(), value: s.to_string() }).into_iter().collect()
}

fn train_config(text: Option<&str>, overrides: &[Override], seed: Option<u64>, unsafe_ranges: bool) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::default();
    if let Some(t) = text {
        cfg.apply_text(t)?;
    }
    for o in overrides.iter().chain(&seed_override(seed)) {
        cfg.set(&o.key, &o.value, 0)?;
    }
    cfg.validate(unsafe_ranges)?;
    Ok(cfg)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| Error::Config {
            key: THREADS_ENV.into(),
            line: 0,
            message: format!("expected a positive integer, got `{v}`"),
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config { key: THREADS_ENV.into(), line: 0, message: e.to_string() })
}

fn dispatch(cli: Cli, overrides: Vec<Override>, argv: &[String]) -> Result<()> {
    let common = cli.command.common().clone();
    let text = read_config(common.config.as_deref())?;
    let manifest = Manifest::new(cli.command.name(), argv);
    let pool = thread_pool()?;
    match cli.command {
        Command::Prepare { input, synthetic, .. } => {
            let mut all = overrides;
            all.extend(seed_override(common.seed));
            let cfg = PrepareConfig::resolve(text.as_deref(), &all)?;
            let input = if synthetic { None } else { input };
            prepare::run(&cfg, input.as_deref(), &common.out, manifest)?;
            if common.pretty {
                let stats = std::fs::read_to_string(common.out.join("stats.tsv"))
                    .map_err(|e| Error::io("reading stats.tsv", e))?;
                print!("{}", table::render_tsv(&stats));
            }
            Ok(())
        }
        Command::Train { data, weak, .. } => {
            let cfg = train_config(text.as_deref(), &overrides, common.seed, common.unsafe_ranges)?;
            train::run(&cfg, &data, weak.as_deref(), &common.out, manifest)?;
            if common.pretty {
                let log = std::fs::read_to_string(common.out.join("train_log.tsv"))
                    .map_err(|e| Error::io("reading train_log.tsv", e))?;
                print!("{}", table::render_tsv(&log));
            }
            Ok(())
        }
        Command::Evaluate { data, checkpoints, .. } => {
            let mut all = overrides;
            all.extend(seed_override(common.seed));
            let cfg = EvalConfig::resolve(text.as_deref(), &all)?;
            pool.install(|| evaluate::run(&cfg, &data, &checkpoints, &common.out, common.pretty, manifest))
        }
        Command::Ablate { data, variants, k, .. } => {
            let cfg = train_config(text.as_deref(), &overrides, common.seed, common.unsafe_ranges)?;
            let variants = ablate::resolve_variants(variants.as_deref())?;
            pool.install(|| ablate::run(&cfg, &data, &variants, k, &common.out, common.pretty, manifest))
        }
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let command = argv.iter().skip(1).find(|a| !a.starts_with('-')).cloned().unwrap_or_default();
    let argv = fill_bare_flags(&argv);
    let (rest, overrides) = match split_overrides(&argv, &config_keys(&command)) {
        Ok(v) => v,
        Err(m) => {
            eprintln!("error: {m}");
            return EXIT_CONFIG;
        }
    };
    let cli = match Cli::try_parse_from(&rest) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli, overrides, &argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
