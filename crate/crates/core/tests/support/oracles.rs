//! Brute-force reimplementations of the ranking and exposure metrics.

use std::collections::HashSet;

use fairdiff::metrics::{aplt_at_k, coverage, delta_exp, gini, ndcg_at_k, recall_at_k};
use fairdiff::numerics::SeededRng;

pub const TOL: f64 = 1e-9;

pub struct Instance {
    pub n_items: usize,
    pub k: usize,
    pub lists: Vec<Vec<usize>>,
    pub relevant: Vec<Vec<usize>>,
    pub tail: Vec<bool>,
}

pub fn instance(n_users: usize, n_items: usize, k: usize, seed: u64) -> Instance {
    let mut rng = SeededRng::new(seed);
    let k = k.min(n_items);
    let mut lists = Vec::new();
    let mut relevant = Vec::new();
    for _ in 0..n_users {
        let mut perm: Vec<usize> = (0..n_items).collect();
        rng.shuffle(&mut perm);
        lists.push(perm[..k].to_vec());
        rng.shuffle(&mut perm);
        let n_rel = rng.below(n_items.min(8) + 1);
        relevant.push(perm[..n_rel].to_vec());
    }
    let mut tail: Vec<bool> = (0..n_items).map(|_| rng.uniform() < 0.6).collect();
    // both groups nonempty
    tail[0] = false;
    tail[n_items - 1] = true;
    Instance { n_items, k, lists, relevant, tail }
}

pub fn oracle_ndcg(list: &[usize], rel: &[usize], k: usize) -> Option<f64> {
    if rel.is_empty() {
        return None;
    }
    let mut dcg = 0.0;
    for (rank, item) in list.iter().enumerate().take(k) {
        if rel.iter().any(|r| r == item) {
            dcg += std::f64::consts::LN_2 / ((rank + 2) as f64).ln();
        }
    }
    let mut ideal = 0.0;
    for rank in 0..rel.len().min(k) {
        ideal += std::f64::consts::LN_2 / ((rank + 2) as f64).ln();
    }
    Some(dcg / ideal)
}

pub fn oracle_recall(list: &[usize], rel: &[usize], k: usize) -> Option<f64> {
    if rel.is_empty() {
        return None;
    }
    let set: HashSet<_> = rel.iter().collect();
    let hits = list[..k.min(list.len())].iter().filter(|i| set.contains(i)).count();
    Some(hits as f64 / rel.len().min(k) as f64)
}

pub fn oracle_aplt(lists: &[Vec<usize>], tail: &[bool], k: usize) -> f64 {
    let mut sum = 0.0;
    for l in lists {
        let mut c = 0;
        for &i in &l[..k.min(l.len())] {
            if tail[i] {
                c += 1;
            }
        }
        sum += c as f64 / k as f64;
    }
    sum / lists.len() as f64
}

pub fn exposure(lists: &[Vec<usize>], n: usize) -> Vec<f64> {
    (0..n).map(|i| lists.iter().flatten().filter(|&&j| j == i).count() as f64).collect()
}

pub fn oracle_delta_exp(lists: &[Vec<usize>], tail: &[bool]) -> f64 {
    let e = exposure(lists, tail.len());
    let head: Vec<f64> = (0..tail.len()).filter(|&i| !tail[i]).map(|i| e[i]).collect();
    let tl: Vec<f64> = (0..tail.len()).filter(|&i| tail[i]).map(|i| e[i]).collect();
    let mh = head.iter().sum::<f64>() / head.len() as f64;
    let mt = tl.iter().sum::<f64>() / tl.len() as f64;
    (mh - mt) / (mh + mt)
}

/// Mean absolute difference over all ordered pairs, divided by twice the mean.
pub fn oracle_gini(lists: &[Vec<usize>], n: usize) -> f64 {
    let e = exposure(lists, n);
    let mean = e.iter().sum::<f64>() / n as f64;
    let mut mad = 0.0;
    for a in &e {
        for b in &e {
            mad += (a - b).abs();
        }
    }
    mad / (2.0 * (n * n) as f64 * mean)
}

pub fn oracle_coverage(lists: &[Vec<usize>], n: usize) -> f64 {
    lists.iter().flatten().collect::<HashSet<_>>().len() as f64 / n as f64
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

/// Every metric on one random instance against its oracle.
pub fn check_instance(users: usize, items: usize, k: usize, seed: u64) -> Result<(), String> {
    let inst = instance(users, items, k, seed);
    let opt_close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => close(a, b),
        (a, b) => a == b,
    };
    for (l, r) in inst.lists.iter().zip(&inst.relevant) {
        let (a, b) = (ndcg_at_k(l, r, inst.k), oracle_ndcg(l, r, inst.k));
        if !opt_close(a, b) {
            return Err(format!("NDCG {a:?} vs {b:?}"));
        }
        let (a, b) = (recall_at_k(l, r, inst.k), oracle_recall(l, r, inst.k));
        if !opt_close(a, b) {
            return Err(format!("Recall {a:?} vs {b:?}"));
        }
    }
    let pairs = [
        ("APLT", aplt_at_k(&inst.lists, &inst.tail, inst.k).map_err(|e| e.to_string())?, oracle_aplt(&inst.lists, &inst.tail, inst.k)),
        ("DeltaExp", delta_exp(&inst.lists, &inst.tail).map_err(|e| e.to_string())?, oracle_delta_exp(&inst.lists, &inst.tail)),
        ("Gini", gini(&inst.lists, inst.n_items).map_err(|e| e.to_string())?, oracle_gini(&inst.lists, inst.n_items)),
        ("Cov", coverage(&inst.lists, inst.n_items), oracle_coverage(&inst.lists, inst.n_items)),
    ];
    for (name, got, want) in pairs {
        if !close(got, want) {
            return Err(format!("{name} {got} vs {want}"));
        }
    }
    Ok(())
}
