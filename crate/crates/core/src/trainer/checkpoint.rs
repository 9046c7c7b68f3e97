use std::path::Path;

use super::config::TrainConfig;
use crate::diffusion::{Denoiser, Role};
use crate::error::{Error, Result};
use crate::guidance::GuidanceNet;
use crate::numerics::{Activation, DenseNet, Layer};

pub const MAGIC: &[u8; 4] = b"A2GD";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Trained parameters plus everything needed to rebuild and score with them.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub epoch: u32,
    pub main: DenseNet<f32>,
    pub weak: Option<DenseNet<f32>>,
    pub aan: Option<DenseNet<f32>>,
    pub running_mean: f32,
    pub running_std: f32,
    /// Validation Recall@20 per completed epoch.
    pub val_history: Vec<f64>,
}

impl Checkpoint {
    pub fn main_denoiser(&self) -> Denoiser<f32> {
        Denoiser::from_net(self.main.clone(), self.config.emb_dim, Role::Main)
    }

    pub fn weak_denoiser(&self) -> Option<Denoiser<f32>> {
        self.weak.as_ref().map(|n| Denoiser::from_net(n.clone(), self.config.emb_dim, Role::Weak))
    }

    pub fn guidance(&self) -> Result<Option<GuidanceNet<f32>>> {
        let Some(net) = &self.aan else { return Ok(None) };
        let mut g = GuidanceNet::from_net(net.clone(), &self.config.guidance_hyper())?;
        g.running_mean = self.running_mean;
        g.running_std = self.running_std;
        Ok(Some(g))
    }

    /// Catalog size the checkpoint was trained on.
    pub fn n_items(&self) -> usize {
        self.main.out_dim()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        let cfg = self.config.to_kv();
        put_u32(&mut out, cfg.len());
        out.extend_from_slice(cfg.as_bytes());
        out.extend_from_slice(&self.epoch.to_le_bytes());

        let mut blocks: Vec<(String, Vec<f32>)> = Vec::new();
        let mut push_net = |prefix: &str, net: &DenseNet<f32>| {
            blocks.extend(net.block_names(prefix).into_iter().zip(net.param_blocks()));
        };
        push_net("main", &self.main);
        if let Some(w) = &self.weak {
            push_net("weak", w);
        }
        if let Some(a) = &self.aan {
            push_net("aan", a);
        }
        blocks.push(("aan.running".into(), vec![self.running_mean, self.running_std]));
        put_u32(&mut out, blocks.len());
        for (name, values) in &blocks {
            put_u32(&mut out, name.len());
            out.extend_from_slice(name.as_bytes());
            put_u32(&mut out, values.len());
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        put_u32(&mut out, self.val_history.len());
        for v in &self.val_history {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let err = |message: String| Error::Checkpoint { path: path.to_path_buf(), message };
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4).map_err(&err)? != MAGIC {
            return Err(err("bad magic, not a checkpoint file".into()));
        }
        let version = r.u32().map_err(&err)?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::VersionMismatch { found: version, expected: CHECKPOINT_VERSION });
        }
        let cfg_len = r.u32().map_err(&err)? as usize;
        let cfg_text = std::str::from_utf8(r.take(cfg_len).map_err(&err)?)
            .map_err(|_| err("config block is not UTF-8".into()))?;
        let config = TrainConfig::parse_str(cfg_text)?;
        let epoch = r.u32().map_err(&err)?;
        let n_blocks = r.u32().map_err(&err)? as usize;
        let mut blocks = Vec::with_capacity(n_blocks.min(1024));
        for _ in 0..n_blocks {
            let name_len = r.u32().map_err(&err)? as usize;
            let name = String::from_utf8(r.take(name_len).map_err(&err)?.to_vec())
                .map_err(|_| err("block name is not UTF-8".into()))?;
            let n = r.u32().map_err(&err)? as usize;
            let raw = r.take(n.checked_mul(4).ok_or_else(|| err("block too large".into()))?).map_err(&err)?;
            let values: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
            blocks.push((name, values));
        }
        let n_hist = r.u32().map_err(&err)? as usize;
        let mut val_history = Vec::with_capacity(n_hist.min(1024));
        for _ in 0..n_hist {
            let b = r.take(8).map_err(&err)?;
            val_history.push(f64::from_le_bytes(b.try_into().expect("8 bytes")));
        }
        if r.pos != bytes.len() {
            return Err(err(format!("{} trailing bytes", bytes.len() - r.pos)));
        }

        let main = rebuild(&blocks, "main", Activation::Tanh).map_err(&err)?.ok_or_else(|| err("missing main network".into()))?;
        let weak = rebuild(&blocks, "weak", Activation::Tanh).map_err(&err)?;
        let aan = rebuild(&blocks, "aan", Activation::Silu).map_err(&err)?;
        let running = blocks
            .iter()
            .find(|(n, _)| n == "aan.running")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| err("missing running statistics".into()))?;
        if running.len() != 2 {
            return Err(err("running statistics must hold two values".into()));
        }
        Ok(Checkpoint { config, epoch, main, weak, aan, running_mean: running[0], running_std: running[1], val_history })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        }
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_bytes(&bytes, path)
    }
}

fn put_u32(out: &mut Vec<u8>, n: usize) {
    out.extend_from_slice(&(n as u32).to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            format!("truncated at byte {} (wanted {n} more of {})", self.pos, self.bytes.len())
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Network from `prefix.{i}.weight` / `prefix.{i}.bias` blocks; shapes come
/// from the block lengths, the last layer is linear.
fn rebuild(
    blocks: &[(String, Vec<f32>)],
    prefix: &str,
    hidden: Activation,
) -> std::result::Result<Option<DenseNet<f32>>, String> {
    let mut layers = Vec::new();
    let mut pairs = Vec::new();
    for i in 0.. {
        let find = |suffix: &str| {
            let name = format!("{prefix}.{i}.{suffix}");
            blocks.iter().find(|(n, _)| *n == name).map(|(_, v)| v.clone())
        };
        match (find("weight"), find("bias")) {
            (Some(w), Some(b)) => pairs.push((w, b)),
            (None, None) => break,
            _ => return Err(format!("layer {prefix}.{i} is missing its weight or bias")),
        }
    }
    if pairs.is_empty() {
        return Ok(None);
    }
    let last = pairs.len() - 1;
    for (i, (w, b)) in pairs.into_iter().enumerate() {
        if b.is_empty() || w.len() % b.len() != 0 {
            return Err(format!("layer {prefix}.{i} has inconsistent block sizes"));
        }
        let in_dim = w.len() / b.len();
        let act = if i == last { Activation::Identity } else { hidden };
        layers.push(Layer::new(w, b, in_dim, act).map_err(|e| e.to_string())?);
    }
    DenseNet::new(layers).map(Some).map_err(|e| e.to_string())
}
