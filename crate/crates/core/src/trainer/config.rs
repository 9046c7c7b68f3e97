use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::guidance::{GuidanceHyper, SignalMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    DiffRec,
    Ag,
    A2g,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DiffRec => "diffrec",
            ModelKind::Ag => "ag",
            ModelKind::A2g => "a2g",
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "diffrec" => Ok(ModelKind::DiffRec),
            "ag" => Ok(ModelKind::Ag),
            "a2g" => Ok(ModelKind::A2g),
            other => Err(format!("unknown model `{other}` (expected diffrec, ag or a2g)")),
        }
    }
}

/// Every knob of a training run. Parsed from `key=value` text; all keys are
/// optional and fall back to the defaults below.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub patience: usize,
    pub steps: usize,
    pub infer_steps: usize,
    pub noise_scale: f64,
    pub noise_min: f64,
    pub noise_max: f64,
    pub hidden: Vec<usize>,
    pub emb_dim: usize,
    pub aan_hidden: Vec<usize>,
    pub lambda_ag: f64,
    pub lambda_pop: f64,
    pub w_max: f64,
    pub tau: f64,
    pub eta: f64,
    pub q_high: f64,
    pub q_low: f64,
    pub e_weak: usize,
    pub pop_k: usize,
    pub tau_pop: f64,
    pub use_d1: bool,
    pub use_d2: bool,
    pub use_d3: bool,
    pub raw_tail_score: bool,
    /// Replaces the learned weight by a constant.
    pub constant_w: Option<f64>,
    /// Fixed weight of the `ag` model.
    pub ag_weight: f64,
    pub sampling_noise: bool,
    pub pure_noise_init: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelKind::A2g,
            seed: 2024,
            epochs: 100,
            batch_size: 400,
            lr: 1e-3,
            patience: 10,
            steps: 10,
            infer_steps: 0,
            noise_scale: 0.1,
            noise_min: 1e-4,
            noise_max: 0.02,
            hidden: vec![256],
            emb_dim: 10,
            aan_hidden: vec![64, 16],
            lambda_ag: 0.5,
            lambda_pop: 0.5,
            w_max: 3.0,
            tau: 2.5,
            eta: 0.6,
            q_high: 0.2,
            q_low: 0.5,
            e_weak: 3,
            pop_k: 50,
            tau_pop: 0.1,
            use_d1: true,
            use_d2: true,
            use_d3: true,
            raw_tail_score: false,
            constant_w: None,
            ag_weight: 1.5,
            sampling_noise: true,
            pure_noise_init: false,
        }
    }
}

pub const CONFIG_KEYS: [&str; 32] = [
    "model",
    "seed",
    "epochs",
    "batch_size",
    "lr",
    "patience",
    "steps",
    "infer_steps",
    "noise_scale",
    "noise_min",
    "noise_max",
    "hidden",
    "emb_dim",
    "aan_hidden",
    "lambda_ag",
    "lambda_pop",
    "w_max",
    "tau",
    "eta",
    "q_high",
    "q_low",
    "e_weak",
    "pop_k",
    "tau_pop",
    "use_d1",
    "use_d2",
    "use_d3",
    "raw_tail_score",
    "constant_w",
    "ag_weight",
    "sampling_noise",
    "pure_noise_init",
];

/// One `key=value` entry with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Splits `key=value` text; `#` starts a comment, blank lines are skipped.
pub fn kv_lines(text: &str) -> Result<Vec<KvEntry>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            key: line.to_string(),
            line: n + 1,
            message: "expected key=value".into(),
        })?;
        out.push(KvEntry { key: key.trim().to_string(), value: value.trim().to_string(), line: n + 1 });
    }
    Ok(out)
}

fn parse<T: FromStr>(key: &str, line: usize, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        key: key.to_string(),
        line,
        message: format!("cannot parse `{value}`"),
    })
}

fn parse_bool(key: &str, line: usize, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config { key: key.into(), line, message: format!("expected a boolean, got `{value}`") }),
    }
}

fn parse_dims(key: &str, line: usize, value: &str) -> Result<Vec<usize>> {
    if value.is_empty() || value == "none" {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, line, v.trim())).collect()
}

fn join(dims: &[usize]) -> String {
    if dims.is_empty() {
        return "none".into();
    }
    dims.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn check(key: &str, value: f64, lo: f64, hi: f64, also: Option<f64>) -> Result<()> {
    if (lo..=hi).contains(&value) || also == Some(value) {
        return Ok(());
    }
    let allowed = match also {
        Some(a) => format!("{{{a}}} ∪ [{lo:.1}, {hi:.1}]"),
        None => format!("[{lo:.1}, {hi:.1}]"),
    };
    Err(Error::OutOfRange { key: key.into(), value: value.to_string(), allowed })
}

impl TrainConfig {
    /// Defaults overlaid with the `key=value` lines of `text`.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for entry in kv_lines(text)? {
            self.set(&entry.key, &entry.value, entry.line)?;
        }
        Ok(())
    }

    /// Sets one key; `line` is reported in errors (0 for flag overrides).
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "model" => {
                self.model = value.parse().map_err(|m| Error::Config { key: key.into(), line, message: m })?
            }
            "seed" => self.seed = parse(key, line, value)?,
            "epochs" => self.epochs = parse(key, line, value)?,
            "batch_size" => self.batch_size = parse(key, line, value)?,
            "lr" => self.lr = parse(key, line, value)?,
            "patience" => self.patience = parse(key, line, value)?,
            "steps" => self.steps = parse(key, line, value)?,
            "infer_steps" => self.infer_steps = parse(key, line, value)?,
            "noise_scale" => self.noise_scale = parse(key, line, value)?,
            "noise_min" => self.noise_min = parse(key, line, value)?,
            "noise_max" => self.noise_max = parse(key, line, value)?,
            "hidden" => self.hidden = parse_dims(key, line, value)?,
            "emb_dim" => self.emb_dim = parse(key, line, value)?,
            "aan_hidden" => self.aan_hidden = parse_dims(key, line, value)?,
            "lambda_ag" => self.lambda_ag = parse(key, line, value)?,
            "lambda_pop" => self.lambda_pop = parse(key, line, value)?,
            "w_max" => self.w_max = parse(key, line, value)?,
            "tau" => self.tau = parse(key, line, value)?,
            "eta" => self.eta = parse(key, line, value)?,
            "q_high" => self.q_high = parse(key, line, value)?,
            "q_low" => self.q_low = parse(key, line, value)?,
            "e_weak" => self.e_weak = parse(key, line, value)?,
            "pop_k" => self.pop_k = parse(key, line, value)?,
            "tau_pop" => self.tau_pop = parse(key, line, value)?,
            "use_d1" => self.use_d1 = parse_bool(key, line, value)?,
            "use_d2" => self.use_d2 = parse_bool(key, line, value)?,
            "use_d3" => self.use_d3 = parse_bool(key, line, value)?,
            "raw_tail_score" => self.raw_tail_score = parse_bool(key, line, value)?,
            "constant_w" => {
                self.constant_w = if value == "none" { None } else { Some(parse(key, line, value)?) }
            }
            "ag_weight" => self.ag_weight = parse(key, line, value)?,
            "sampling_noise" => self.sampling_noise = parse_bool(key, line, value)?,
            "pure_noise_init" => self.pure_noise_init = parse_bool(key, line, value)?,
            _ => {
                return Err(Error::Config {
                    key: key.into(),
                    line,
                    message: format!("unknown key (valid keys: {})", CONFIG_KEYS.join(", ")),
                })
            }
        }
        Ok(())
    }

    /// Canonical `key=value` text with every key present, in a fixed order.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(s, "{key}={}", self.get(key).unwrap_or_default());
        }
        s
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "model" => self.model.name().into(),
            "seed" => self.seed.to_string(),
            "epochs" => self.epochs.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "lr" => self.lr.to_string(),
            "patience" => self.patience.to_string(),
            "steps" => self.steps.to_string(),
            "infer_steps" => self.infer_steps.to_string(),
            "noise_scale" => self.noise_scale.to_string(),
            "noise_min" => self.noise_min.to_string(),
            "noise_max" => self.noise_max.to_string(),
            "hidden" => join(&self.hidden),
            "emb_dim" => self.emb_dim.to_string(),
            "aan_hidden" => join(&self.aan_hidden),
            "lambda_ag" => self.lambda_ag.to_string(),
            "lambda_pop" => self.lambda_pop.to_string(),
            "w_max" => self.w_max.to_string(),
            "tau" => self.tau.to_string(),
            "eta" => self.eta.to_string(),
            "q_high" => self.q_high.to_string(),
            "q_low" => self.q_low.to_string(),
            "e_weak" => self.e_weak.to_string(),
            "pop_k" => self.pop_k.to_string(),
            "tau_pop" => self.tau_pop.to_string(),
            "use_d1" => self.use_d1.to_string(),
            "use_d2" => self.use_d2.to_string(),
            "use_d3" => self.use_d3.to_string(),
            "raw_tail_score" => self.raw_tail_score.to_string(),
            "constant_w" => self.constant_w.map_or("none".into(), |w| w.to_string()),
            "ag_weight" => self.ag_weight.to_string(),
            "sampling_noise" => self.sampling_noise.to_string(),
            "pure_noise_init" => self.pure_noise_init.to_string(),
            _ => return None,
        })
    }

    /// Keys whose values differ between two configs.
    pub fn diff(&self, other: &TrainConfig) -> Vec<&'static str> {
        CONFIG_KEYS.iter().copied().filter(|k| self.get(k) != other.get(k)).collect()
    }

    /// Structural checks always apply; the tuned search ranges apply unless
    /// `unsafe_ranges` is set. `λ_pop = 0` and `η = 0` are accepted as the
    /// ablation settings.
    pub fn validate(&self, unsafe_ranges: bool) -> Result<()> {
        let structural = |key: &str, ok: bool, allowed: &str, value: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::OutOfRange { key: key.into(), value, allowed: allowed.into() })
            }
        };
        structural("epochs", (1..=100).contains(&self.epochs), "[1, 100]", self.epochs.to_string())?;
        structural("batch_size", self.batch_size >= 1, "≥ 1", self.batch_size.to_string())?;
        structural("lr", self.lr > 0.0 && self.lr.is_finite(), "> 0", self.lr.to_string())?;
        structural("steps", self.steps >= 1, "≥ 1", self.steps.to_string())?;
        structural("infer_steps", self.infer_steps <= self.steps, "[0, steps]", self.infer_steps.to_string())?;
        structural("emb_dim", self.emb_dim >= 2 && self.emb_dim % 2 == 0, "even, ≥ 2", self.emb_dim.to_string())?;
        structural("pop_k", self.pop_k >= 1, "≥ 1", self.pop_k.to_string())?;
        structural("tau_pop", self.tau_pop > 0.0, "> 0", self.tau_pop.to_string())?;
        structural("hidden", self.hidden.iter().all(|&h| h > 0), "positive widths", join(&self.hidden))?;
        structural("aan_hidden", self.aan_hidden.iter().all(|&h| h > 0), "positive widths", join(&self.aan_hidden))?;
        structural("e_weak", self.e_weak >= 1, "≥ 1", self.e_weak.to_string())?;
        let lo = self.noise_scale * self.noise_min;
        let hi = self.noise_scale * self.noise_max;
        structural("noise_scale", lo > 0.0 && lo <= hi && hi < 1.0, "0 < scaled β range < 1", self.noise_scale.to_string())?;
        structural(
            "q_high",
            self.q_high >= 0.0 && self.q_low >= 0.0 && self.q_high + self.q_low <= 1.0,
            "q_high + q_low ≤ 1",
            self.q_high.to_string(),
        )?;
        structural("w_max", self.w_max > 1.0, "> 1", self.w_max.to_string())?;
        structural("tau", self.tau > 0.0, "> 0", self.tau.to_string())?;
        structural("eta", self.eta >= 0.0, "≥ 0", self.eta.to_string())?;
        if unsafe_ranges {
            return Ok(());
        }
        check("lambda_ag", self.lambda_ag, 0.2, 1.0, None)?;
        check("lambda_pop", self.lambda_pop, 0.2, 1.0, Some(0.0))?;
        check("w_max", self.w_max, 2.0, 4.0, None)?;
        check("tau", self.tau, 2.0, 3.0, None)?;
        check("eta", self.eta, 0.4, 0.8, Some(0.0))?;
        check("q_high", self.q_high, 0.1, 0.4, None)?;
        check("q_low", self.q_low, 0.4, 0.8, None)?;
        if !(1..=10).contains(&self.e_weak) {
            return Err(Error::OutOfRange { key: "e_weak".into(), value: self.e_weak.to_string(), allowed: "{1, …, 10}".into() });
        }
        Ok(())
    }

    pub fn prior(&self) -> [f64; 3] {
        [self.q_high, 1.0 - self.q_high - self.q_low, self.q_low]
    }

    pub fn guidance_hyper(&self) -> GuidanceHyper {
        GuidanceHyper {
            w_max: self.w_max,
            eta: self.eta,
            tau: self.tau,
            features: SignalMask { d1: self.use_d1, d2: self.use_d2, d3: self.use_d3 },
            raw_tail_score: self.raw_tail_score,
        }
    }
}
