use super::dataset::InteractionDataset;
use crate::error::{Error, Result};

/// Item popularity class. The extreme bins each hold roughly a fifth of all
/// train interactions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PopBin {
    High,
    Mid,
    Low,
}

impl PopBin {
    pub const ALL: [PopBin; 3] = [PopBin::High, PopBin::Mid, PopBin::Low];

    pub fn index(self) -> usize {
        match self {
            PopBin::High => 0,
            PopBin::Mid => 1,
            PopBin::Low => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PopBin::High => "high",
            PopBin::Mid => "mid",
            PopBin::Low => "low",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        PopBin::ALL.into_iter().find(|b| b.name() == s)
    }
}

/// Items ordered from most to least popular; ties by ascending id.
fn popularity_order(counts: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    order
}

fn check_catalog(counts: &[u64]) -> Result<u64> {
    if counts.len() < 3 {
        return Err(Error::DegenerateCatalog(format!("{} items; at least 3 required", counts.len())));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::DegenerateCatalog("no train interactions".into()));
    }
    Ok(total)
}

/// HighPop: most popular items up to and including the one whose cumulative
/// mass first reaches 20%. LowPop: the same walk from the least popular end,
/// never entering HighPop. Everything else is MidPop.
pub fn popularity_bins(counts: &[u64]) -> Result<Vec<PopBin>> {
    let total = check_catalog(counts)?;
    let order = popularity_order(counts);
    let mut bins = vec![PopBin::Mid; counts.len()];

    let mut cum = 0u64;
    let mut high_len = 0;
    for &i in &order {
        bins[i] = PopBin::High;
        cum += counts[i];
        high_len += 1;
        if cum * 5 >= total {
            break;
        }
    }
    cum = 0;
    for &i in order[high_len..].iter().rev() {
        bins[i] = PopBin::Low;
        cum += counts[i];
        if cum * 5 >= total {
            break;
        }
    }
    Ok(bins)
}

/// Long-tail mask: the head is the most popular items cumulatively covering
/// 80% of train interactions (boundary item included); the rest is tail.
pub fn tail_mask(counts: &[u64]) -> Result<Vec<bool>> {
    let total = check_catalog(counts)?;
    let mut tail = vec![true; counts.len()];
    let mut cum = 0u64;
    for i in popularity_order(counts) {
        tail[i] = false;
        cum += counts[i];
        if cum * 5 >= total * 4 {
            break;
        }
    }
    Ok(tail)
}

/// Share of `items` falling in each bin, `[high, mid, low]`.
pub fn history_distribution(items: &[usize], bins: &[PopBin]) -> Result<[f64; 3]> {
    if items.is_empty() {
        return Err(Error::InvalidInput("user has no train history".into()));
    }
    let mut counts = [0usize; 3];
    for &i in items {
        counts[bins[i].index()] += 1;
    }
    let n = items.len() as f64;
    Ok(counts.map(|c| c as f64 / n))
}

/// Popularity structure derived from the train split.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityProfile {
    pub counts: Vec<u64>,
    pub bins: Vec<PopBin>,
    pub tail: Vec<bool>,
    /// `H_u` per user; `None` for users without train history.
    pub history: Vec<Option<[f64; 3]>>,
    /// Fairness prior `Q = [high, mid, low]`.
    pub prior: [f64; 3],
}

pub const DEFAULT_PRIOR: [f64; 3] = [0.2, 0.3, 0.5];

impl PopularityProfile {
    pub fn build(ds: &InteractionDataset, prior: [f64; 3]) -> Result<Self> {
        let total: f64 = prior.iter().sum();
        if prior.iter().any(|q| !(*q >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::hyper("Q", format!("prior {prior:?} is not a distribution")));
        }
        let counts = ds.train_counts();
        let bins = popularity_bins(&counts)?;
        let tail = tail_mask(&counts)?;
        let history = ds.train.iter().map(|h| history_distribution(h, &bins).ok()).collect();
        Ok(PopularityProfile { counts, bins, tail, history, prior })
    }

    pub fn n_items(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_sizes(&self) -> [usize; 3] {
        let mut sizes = [0; 3];
        for b in &self.bins {
            sizes[b.index()] += 1;
        }
        sizes
    }

    pub fn tail_fraction(&self) -> f64 {
        self.tail.iter().filter(|t| **t).count() as f64 / self.n_items() as f64
    }

    pub fn items_in(&self, bin: PopBin) -> Vec<usize> {
        (0..self.n_items()).filter(|&i| self.bins[i] == bin).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members(bins: &[PopBin], bin: PopBin) -> Vec<usize> {
        (0..bins.len()).filter(|&i| bins[i] == bin).collect()
    }

    // cumulative-sum oracle: walks a full sort and records the first index
    // whose running mass reaches a fifth of the total
    fn oracle_extreme(counts: &[u64], from_top: bool) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..counts.len()).collect();
        idx.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        if !from_top {
            idx.reverse();
        }
        let total: u64 = counts.iter().sum();
        let mut out = Vec::new();
        let mut run = 0.0;
        for i in idx {
            out.push(i);
            run += counts[i] as f64;
            if run >= 0.2 * total as f64 {
                break;
            }
        }
        out.sort();
        out
    }

    #[test]
    fn skewed_five_items() {
        let counts = [40, 30, 20, 5, 5];
        let bins = popularity_bins(&counts).unwrap();
        assert_eq!(members(&bins, PopBin::High), vec![0]);
        assert_eq!(members(&bins, PopBin::Low), vec![2, 3, 4]);
        assert_eq!(members(&bins, PopBin::Mid), vec![1]);
        assert_eq!(members(&bins, PopBin::High), oracle_extreme(&counts, true));
        assert_eq!(members(&bins, PopBin::Low), oracle_extreme(&counts, false));
    }

    #[test]
    fn uniform_ten_items() {
        let bins = popularity_bins(&[7; 10]).unwrap();
        assert_eq!(members(&bins, PopBin::High).len(), 2);
        assert_eq!(members(&bins, PopBin::Low).len(), 2);
    }

    #[test]
    fn dominant_item_alone_in_high() {
        let bins = popularity_bins(&[90, 4, 3, 2, 1]).unwrap();
        assert_eq!(members(&bins, PopBin::High), vec![0]);
        // the low walk stops before reaching HighPop even if short of 20%
        assert_eq!(members(&bins, PopBin::Low), vec![1, 2, 3, 4]);
    }

    #[test]
    fn degenerate_catalog() {
        assert!(matches!(popularity_bins(&[3, 4]), Err(Error::DegenerateCatalog(_))));
        assert!(tail_mask(&[0, 0, 0]).is_err());
    }

    #[test]
    fn tail_mask_pareto() {
        let tail = tail_mask(&[80, 10, 5, 5]).unwrap();
        assert_eq!(tail, vec![false, true, true, true]);
        let uniform = tail_mask(&[1; 10]).unwrap();
        assert_eq!(uniform, vec![false, false, false, false, false, false, false, false, true, true]);
    }

    #[test]
    fn history_cases() {
        let bins = [PopBin::High, PopBin::High, PopBin::Mid, PopBin::Low];
        assert_eq!(history_distribution(&[0, 1], &bins).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(history_distribution(&[0, 1, 2, 3], &bins).unwrap(), [0.5, 0.25, 0.25]);
        assert!(history_distribution(&[], &bins).is_err());
    }
}
