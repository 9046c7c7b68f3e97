use std::path::Path;

use fairdiff::data::synthetic::{zipf_events, SyntheticSpec};
use fairdiff::data::{chrono_split, dedup_and_kcore, load_interactions, write_dataset, FormatSpec};
use fairdiff::trainer::kv_lines;
use fairdiff::{Error, Result};

use crate::args::Override;
use crate::manifest::{dataset_hash, file_hash, Manifest};

pub const PREPARE_KEYS: [&str; 12] = [
    "seed",
    "kcore",
    "split",
    "delimiter",
    "min_weight",
    "skip_header",
    "synth_users",
    "synth_items",
    "synth_per_user",
    "synth_exponent",
    "synth_clusters",
    "synth_affinity",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareConfig {
    pub seed: u64,
    pub kcore: usize,
    pub split: (u32, u32, u32),
    pub format: FormatSpec,
    pub synthetic: SyntheticSpec,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        PrepareConfig {
            seed: 7,
            kcore: 5,
            split: (7, 1, 2),
            format: FormatSpec::default(),
            synthetic: SyntheticSpec::default(),
        }
    }
}

fn bad(key: &str, line: usize, value: &str) -> Error {
    Error::Config { key: key.into(), line, message: format!("cannot parse `{value}`") }
}

fn num<T: std::str::FromStr>(key: &str, line: usize, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, line, value))
}

impl PrepareConfig {
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "seed" => self.seed = num(key, line, value)?,
            "kcore" => self.kcore = num(key, line, value)?,
            "split" => {
                let parts: Vec<u32> =
                    value.split(':').map(|p| num(key, line, p)).collect::<Result<Vec<_>>>()?;
                if parts.len() != 3 {
                    return Err(bad(key, line, value));
                }
                self.split = (parts[0], parts[1], parts[2]);
            }
            "delimiter" => {
                self.format.delimiter = match value {
                    "tab" | "\\t" => '\t',
                    "comma" | "," => ',',
                    "space" => ' ',
                    "semicolon" | ";" => ';',
                    v if v.chars().count() == 1 => v.chars().next().unwrap_or('\t'),
                    _ => return Err(bad(key, line, value)),
                }
            }
            "min_weight" => {
                self.format.min_weight = if value == "none" { None } else { Some(num(key, line, value)?) }
            }
            "skip_header" => self.format.skip_header = num(key, line, value)?,
            "synth_users" => self.synthetic.users = num(key, line, value)?,
            "synth_items" => self.synthetic.items = num(key, line, value)?,
            "synth_per_user" => self.synthetic.mean_per_user = num(key, line, value)?,
            "synth_exponent" => self.synthetic.exponent = num(key, line, value)?,
            "synth_clusters" => self.synthetic.clusters = num(key, line, value)?,
            "synth_affinity" => self.synthetic.affinity = num(key, line, value)?,
            _ => {
                return Err(Error::Config {
                    key: key.into(),
                    line,
                    message: format!("unknown key (valid keys: {})", PREPARE_KEYS.join(", ")),
                })
            }
        }
        Ok(())
    }

    pub fn resolve(text: Option<&str>, overrides: &[Override]) -> Result<Self> {
        let mut c = PrepareConfig::default();
        if let Some(t) = text {
            for e in kv_lines(t)? {
                c.set(&e.key, &e.value, e.line)?;
            }
        }
        for o in overrides {
            c.set(&o.key, &o.value, 0)?;
        }
        c.synthetic.seed = c.seed;
        if c.kcore == 0 {
            return Err(Error::OutOfRange { key: "kcore".into(), value: "0".into(), allowed: "≥ 1".into() });
        }
        Ok(c)
    }

    pub fn to_kv(&self) -> String {
        let s = &self.synthetic;
        let delim = match self.format.delimiter {
            '\t' => "tab".to_string(),
            ' ' => "space".to_string(),
            c => c.to_string(),
        };
        format!(
            "seed={}\nkcore={}\nsplit={}:{}:{}\ndelimiter={}\nmin_weight={}\nskip_header={}\nsynth_users={}\nsynth_items={}\nsynth_per_user={}\nsynth_exponent={}\nsynth_clusters={}\nsynth_affinity={}\n",
            self.seed,
            self.kcore,
            self.split.0,
            self.split.1,
            self.split.2,
            delim,
            self.format.min_weight.map_or("none".into(), |w| w.to_string()),
            self.format.skip_header,
            s.users,
            s.items,
            s.mean_per_user,
            s.exponent,
            s.clusters,
            s.affinity
        )
    }
}

pub fn run(cfg: &PrepareConfig, input: Option<&Path>, out: &Path, mut manifest: Manifest) -> Result<()> {
    manifest.push("input", input.map_or("synthetic".into(), |p| p.display().to_string()));
    if let Some(p) = input {
        manifest.push("input.sha256", file_hash(p)?);
    }
    manifest.push("output", out.display());
    manifest.push_config("config", &cfg.to_kv());
    manifest.write(out)?;

    let events = match input {
        Some(p) => load_interactions(p, &cfg.format)?,
        None => zipf_events(&cfg.synthetic),
    };
    let filtered = dedup_and_kcore(&events, cfg.kcore)?;
    let ds = chrono_split(&filtered, cfg.split)?;
    write_dataset(&ds, out)?;
    eprintln!("dataset {} written ({})", out.display(), dataset_hash(out)?);
    Ok(())
}
