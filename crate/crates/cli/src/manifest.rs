use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use fairdiff::data::DATASET_FILES;
use fairdiff::{Error, Result};
use sha2::{Digest, Sha256};

/// Run record written before any work starts.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        let mut m = Manifest::default();
        m.push("command", command);
        m.push("argv", argv.join(" "));
        m.push("started_unix", started().to_string());
        m
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    /// Adds every `key=value` line of a resolved config under `prefix.`.
    pub fn push_config(&mut self, prefix: &str, kv: &str) {
        for line in kv.lines() {
            if let Some((k, v)) = line.split_once('=') {
                self.push(format!("{prefix}.{k}"), v);
            }
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("key\tvalue\n");
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}\t{v}");
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_file(dir, "manifest.tsv", &self.to_tsv())
    }
}

/// `SOURCE_DATE_EPOCH` when set, so manifests can be made reproducible.
fn started() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// SHA-256 over the dataset files (name, length, bytes) in a fixed order.
pub fn dataset_hash(dir: &Path) -> Result<String> {
    let mut h = Sha256::new();
    for name in DATASET_FILES {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
