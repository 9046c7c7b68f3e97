use std::fmt::Write as _;

use rayon::prelude::*;

use super::exposure::{aplt_at_k, coverage, delta_exp, gini};
use super::ranking::{ndcg_at_k, recall_at_k, topk_masked};
use crate::data::{InteractionDataset, Split};
use crate::error::{Error, Result};
use crate::numerics::{Scalar, SeededRng};

pub const CUTOFFS: [usize; 4] = [10, 20, 50, 100];

/// Metric names in emission order.
pub const METRIC_NAMES: [&str; 6] = ["NDCG", "Recall", "APLT", "DeltaExp", "Gini", "Cov"];

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffMetrics {
    pub k: usize,
    pub ndcg: f64,
    pub recall: f64,
    pub aplt: f64,
    pub delta_exp: f64,
    pub gini: f64,
    pub coverage: f64,
}

impl CutoffMetrics {
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "NDCG" => self.ndcg,
            "Recall" => self.recall,
            "APLT" => self.aplt,
            "DeltaExp" => self.delta_exp,
            "Gini" => self.gini,
            "Cov" => self.coverage,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserMetrics {
    pub user: usize,
    pub ndcg: Vec<f64>,
    pub aplt: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub model: String,
    pub cutoffs: Vec<CutoffMetrics>,
    /// One entry per evaluated user, values aligned with `cutoffs`.
    pub per_user: Vec<UserMetrics>,
}

/// Ranked lists for the evaluated users, in user order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedUsers {
    pub users: Vec<usize>,
    pub lists: Vec<Vec<usize>>,
}

/// Users with a nonempty `split` target, scored in parallel and ranked with
/// their seen items masked. Each user draws from its own derived stream so
/// results do not depend on thread count.
pub fn rank_users<F, S>(ds: &InteractionDataset, split: Split, k: usize, seed: u64, score: S) -> Result<RankedUsers>
where
    F: Scalar,
    S: Fn(usize, &mut SeededRng) -> Result<Vec<F>> + Sync,
{
    let users = ds.evaluable_users(split);
    let lists = users
        .par_iter()
        .map(|&u| {
            let mut rng = SeededRng::derive(seed, u as u64);
            let scores = score(u, &mut rng)?;
            if scores.len() != ds.n_items() {
                return Err(Error::InvalidInput(format!(
                    "scorer returned {} scores for {} items",
                    scores.len(),
                    ds.n_items()
                )));
            }
            let mask = ds.seen_mask(u, split);
            Ok(topk_masked(&scores, k, Some(&mask)).items)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankedUsers { users, lists })
}

/// Full report from lists ranked at the largest cutoff; smaller cutoffs use
/// prefixes.
pub fn evaluate_lists(
    model: &str,
    ds: &InteractionDataset,
    split: Split,
    ranked: &RankedUsers,
    tail: &[bool],
    cutoffs: &[usize],
) -> Result<MetricsReport> {
    if ranked.users.is_empty() {
        return Err(Error::UndefinedMetric(format!("no users with {split:?} items")));
    }
    let mut per_user: Vec<UserMetrics> = ranked
        .users
        .iter()
        .map(|&user| UserMetrics { user, ndcg: Vec::new(), aplt: Vec::new() })
        .collect();
    let mut out = Vec::with_capacity(cutoffs.len());
    for &k in cutoffs {
        let lists: Vec<Vec<usize>> = ranked.lists.iter().map(|l| l[..k.min(l.len())].to_vec()).collect();
        let (mut ndcg, mut recall) = (0.0, 0.0);
        for (pu, list) in per_user.iter_mut().zip(&lists) {
            let target = ds.split(split)[pu.user].as_slice();
            let n = ndcg_at_k(list, target, k).unwrap_or(0.0);
            ndcg += n;
            recall += recall_at_k(list, target, k).unwrap_or(0.0);
            pu.ndcg.push(n);
            pu.aplt.push(list.iter().filter(|&&i| tail[i]).count() as f64 / k as f64);
        }
        let n = lists.len() as f64;
        out.push(CutoffMetrics {
            k,
            ndcg: ndcg / n,
            recall: recall / n,
            aplt: aplt_at_k(&lists, tail, k)?,
            delta_exp: delta_exp(&lists, tail)?,
            gini: gini(&lists, ds.n_items())?,
            coverage: coverage(&lists, ds.n_items()),
        });
    }
    Ok(MetricsReport { model: model.to_string(), cutoffs: out, per_user })
}

/// Mean Recall@K of ranked lists on `split`, the early-stopping signal.
pub fn mean_recall(ds: &InteractionDataset, split: Split, ranked: &RankedUsers, k: usize) -> f64 {
    if ranked.users.is_empty() {
        return 0.0;
    }
    let total: f64 = ranked
        .users
        .iter()
        .zip(&ranked.lists)
        .map(|(&u, l)| recall_at_k(l, &ds.split(split)[u], k).unwrap_or(0.0))
        .sum();
    total / ranked.users.len() as f64
}

impl MetricsReport {
    pub fn cutoff(&self, k: usize) -> Option<&CutoffMetrics> {
        self.cutoffs.iter().find(|c| c.k == k)
    }

    pub fn tsv_header() -> &'static str {
        "model\tK\tmetric\tvalue\n"
    }

    /// Rows `model, K, metric, value` without header.
    pub fn tsv_rows(&self) -> String {
        let mut s = String::new();
        for c in &self.cutoffs {
            for name in METRIC_NAMES {
                let _ = writeln!(s, "{}\t{}\t{}\t{:.6}", self.model, c.k, name, c.get(name).unwrap_or(f64::NAN));
            }
        }
        s
    }

    pub fn per_user_header() -> &'static str {
        "model\tuser\tK\tNDCG\tAPLT\n"
    }

    pub fn per_user_rows(&self, user_names: &[String]) -> String {
        let mut s = String::new();
        for pu in &self.per_user {
            let name = user_names.get(pu.user).map(String::as_str).unwrap_or("?");
            for (j, c) in self.cutoffs.iter().enumerate() {
                let _ = writeln!(s, "{}\t{}\t{}\t{:.6}\t{:.6}", self.model, name, c.k, pu.ndcg[j], pu.aplt[j]);
            }
        }
        s
    }
}
