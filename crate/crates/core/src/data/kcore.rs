use std::collections::{HashMap, HashSet};

use super::load::RawEvent;
use crate::error::{Error, Result};

/// Removes duplicate (user, item) pairs, keeping the earliest event, then
/// iteratively drops users and items with fewer than `k` interactions until
/// a fixed point is reached. Surviving events keep their input order.
pub fn dedup_and_kcore(events: &[RawEvent], k: usize) -> Result<Vec<RawEvent>> {
    if k == 0 {
        return Err(Error::hyper("k", "k-core threshold must be at least 1"));
    }
    let mut first: HashMap<(&str, &str), usize> = HashMap::new();
    for (idx, e) in events.iter().enumerate() {
        first
            .entry((e.user.as_str(), e.item.as_str()))
            .and_modify(|cur| {
                if e.timestamp < events[*cur].timestamp {
                    *cur = idx;
                }
            })
            .or_insert(idx);
    }
    let mut keep: Vec<usize> = first.into_values().collect();
    keep.sort_unstable();

    loop {
        let mut user_deg: HashMap<&str, usize> = HashMap::new();
        let mut item_deg: HashMap<&str, usize> = HashMap::new();
        for &i in &keep {
            *user_deg.entry(events[i].user.as_str()).or_default() += 1;
            *item_deg.entry(events[i].item.as_str()).or_default() += 1;
        }
        let before = keep.len();
        keep.retain(|&i| user_deg[events[i].user.as_str()] >= k && item_deg[events[i].item.as_str()] >= k);
        if keep.len() == before {
            break;
        }
    }
    if keep.is_empty() {
        return Err(Error::EmptyAfterFilter { k });
    }
    Ok(keep.into_iter().map(|i| events[i].clone()).collect())
}

/// Distinct users and items in an event list.
pub fn distinct_counts(events: &[RawEvent]) -> (usize, usize) {
    let users: HashSet<&str> = events.iter().map(|e| e.user.as_str()).collect();
    let items: HashSet<&str> = events.iter().map(|e| e.item.as_str()).collect();
    (users.len(), items.len())
}
