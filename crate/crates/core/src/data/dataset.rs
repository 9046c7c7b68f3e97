use std::collections::HashMap;

use super::load::RawEvent;
use crate::error::{Error, Result};
use crate::numerics::Scalar;

/// Users and items remapped to dense ids, with per-user chronologically
/// ordered train/validation/test item lists.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionDataset {
    /// Original id of each dense user id.
    pub users: Vec<String>,
    /// Original id of each dense item id.
    pub items: Vec<String>,
    pub train: Vec<Vec<usize>>,
    pub val: Vec<Vec<usize>>,
    pub test: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Dense id order: numeric ids sort numerically when every id parses as an
/// integer, lexicographically otherwise.
pub(crate) fn sorted_ids<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut v: Vec<String> = ids.map(str::to_string).collect();
    v.sort();
    v.dedup();
    if v.iter().all(|s| s.parse::<i64>().is_ok()) {
        v.sort_by_key(|s| s.parse::<i64>().unwrap());
    }
    v
}

/// Splits each user's history by time: the earliest `floor(n·a/s)` events go
/// to train, the next `floor(n·b/s)` to validation, the rest to test, where
/// `(a, b, c)` are the ratios and `s = a + b + c`. Timestamp ties are broken
/// by ascending dense item id. Users with an empty train split are dropped.
pub fn chrono_split(events: &[RawEvent], ratios: (u32, u32, u32)) -> Result<InteractionDataset> {
    if events.is_empty() {
        return Err(Error::EmptyDataset("no events to split".into()));
    }
    let (a, b, c) = ratios;
    let s = (a + b + c) as usize;
    if s == 0 {
        return Err(Error::hyper("ratios", "split ratios must not all be zero"));
    }
    let items = sorted_ids(events.iter().map(|e| e.item.as_str()));
    let item_index: HashMap<&str, usize> = items.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let user_order = sorted_ids(events.iter().map(|e| e.user.as_str()));
    let user_index: HashMap<&str, usize> = user_order.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();

    let mut per_user: Vec<Vec<(i64, usize)>> = vec![Vec::new(); user_order.len()];
    for e in events {
        per_user[user_index[e.user.as_str()]].push((e.timestamp, item_index[e.item.as_str()]));
    }

    let mut ds = InteractionDataset { users: Vec::new(), items, train: Vec::new(), val: Vec::new(), test: Vec::new() };
    for (u, mut hist) in per_user.into_iter().enumerate() {
        hist.sort_unstable();
        let n = hist.len();
        let n_train = n * a as usize / s;
        let n_val = n * b as usize / s;
        if n_train == 0 {
            continue;
        }
        let ordered: Vec<usize> = hist.into_iter().map(|(_, i)| i).collect();
        ds.users.push(user_order[u].clone());
        ds.train.push(ordered[..n_train].to_vec());
        ds.val.push(ordered[n_train..n_train + n_val].to_vec());
        ds.test.push(ordered[n_train + n_val..].to_vec());
    }
    if ds.users.is_empty() {
        return Err(Error::EmptyDataset("every user has an empty train split".into()));
    }
    Ok(ds)
}

impl InteractionDataset {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn split(&self, split: Split) -> &[Vec<usize>] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn interactions(&self) -> usize {
        self.train.iter().chain(&self.val).chain(&self.test).map(Vec::len).sum()
    }

    /// Train-split interaction count per item.
    pub fn train_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_items()];
        for hist in &self.train {
            for &i in hist {
                counts[i] += 1;
            }
        }
        counts
    }

    /// Dense binary interaction vector of user `u` over the catalog.
    pub fn vector<F: Scalar>(&self, u: usize, split: Split) -> Vec<F> {
        let mut x = vec![F::zero(); self.n_items()];
        for &i in &self.split(split)[u] {
            x[i] = F::one();
        }
        x
    }

    /// Items excluded from ranking when evaluating `target`: train items for
    /// validation, train and validation items for test.
    pub fn seen_mask(&self, u: usize, target: Split) -> Vec<bool> {
        let mut mask = vec![false; self.n_items()];
        let sources: &[&Vec<usize>] = match target {
            Split::Train => &[],
            Split::Val => &[&self.train[u]],
            Split::Test => &[&self.train[u], &self.val[u]],
        };
        for hist in sources {
            for &i in hist.iter() {
                mask[i] = true;
            }
        }
        mask
    }

    /// Users with at least one item in `split`.
    pub fn evaluable_users(&self, split: Split) -> Vec<usize> {
        (0..self.n_users()).filter(|&u| !self.split(split)[u].is_empty()).collect()
    }
}

/// Catalog size and sparsity figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub users: usize,
    pub items: usize,
    pub interactions: usize,
    /// `100 · (1 − interactions / (users · items))`.
    pub sparsity_pct: f64,
}

impl DatasetStats {
    pub fn from_counts(users: usize, items: usize, interactions: usize) -> Self {
        let cells = users as f64 * items as f64;
        let sparsity_pct = if cells > 0.0 { 100.0 * (1.0 - interactions as f64 / cells) } else { 100.0 };
        DatasetStats { users, items, interactions, sparsity_pct }
    }
}

pub fn dataset_stats(ds: &InteractionDataset) -> DatasetStats {
    DatasetStats::from_counts(ds.n_users(), ds.n_items(), ds.interactions())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user_events(user: &str, n: usize) -> Vec<RawEvent> {
        (0..n).map(|i| RawEvent::new(user, format!("{i}"), (100 - i) as i64)).collect()
    }

    #[test]
    fn ten_events_split_seven_one_two() {
        let ds = chrono_split(&user_events("a", 10), (7, 1, 2)).unwrap();
        assert_eq!((ds.train[0].len(), ds.val[0].len(), ds.test[0].len()), (7, 1, 2));
        // timestamps decrease with item id, so time order is descending id
        assert_eq!(ds.train[0], vec![9, 8, 7, 6, 5, 4, 3]);
        assert_eq!(ds.test[0], vec![1, 0]);
    }

    #[test]
    fn five_events_floor_rule() {
        let ds = chrono_split(&user_events("a", 5), (7, 1, 2)).unwrap();
        assert_eq!((ds.train[0].len(), ds.val[0].len(), ds.test[0].len()), (3, 0, 2));
    }

    #[test]
    fn timestamp_ties_break_by_item_id() {
        let events = vec![
            RawEvent::new("u", "7", 5),
            RawEvent::new("u", "3", 5),
            RawEvent::new("u", "1", 6),
        ];
        for _ in 0..3 {
            let ds = chrono_split(&events, (1, 0, 0)).unwrap();
            // dense ids: "1"→0, "3"→1, "7"→2
            assert_eq!(ds.train[0], vec![1, 2, 0]);
        }
    }

    #[test]
    fn users_without_train_are_dropped() {
        let mut events = user_events("a", 10);
        events.push(RawEvent::new("b", "0", 1));
        let ds = chrono_split(&events, (7, 1, 2)).unwrap();
        assert_eq!(ds.users, vec!["a".to_string()]);
    }

    #[test]
    fn numeric_ids_sort_numerically() {
        assert_eq!(sorted_ids(["10", "9", "100"].into_iter()), vec!["9", "10", "100"]);
        assert_eq!(sorted_ids(["b", "10", "a"].into_iter()), vec!["10", "a", "b"]);
    }

    #[test]
    fn stats_from_counts() {
        let s = DatasetStats::from_counts(2, 2, 1);
        assert!((s.sparsity_pct - 75.0).abs() < 1e-12);
    }

    #[test]
    fn seen_mask_by_target() {
        let ds = chrono_split(&user_events("a", 10), (7, 1, 2)).unwrap();
        let val_mask = ds.seen_mask(0, Split::Val);
        let test_mask = ds.seen_mask(0, Split::Test);
        assert_eq!(val_mask.iter().filter(|m| **m).count(), 7);
        assert_eq!(test_mask.iter().filter(|m| **m).count(), 8);
        assert_eq!(ds.vector::<f64>(0, Split::Test), {
            let mut v = vec![0.0; 10];
            v[0] = 1.0;
            v[1] = 1.0;
            v
        });
    }
}
