use super::ranking::topk_masked;
use crate::numerics::SeededRng;

/// `k` distinct items drawn uniformly from those not masked.
pub fn random_list(rng: &mut SeededRng, mask: &[bool], k: usize) -> Vec<usize> {
    let mut eligible: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
    let take = k.min(eligible.len());
    for j in 0..take {
        let pick = j + rng.below(eligible.len() - j);
        eligible.swap(j, pick);
    }
    eligible.truncate(take);
    eligible
}

/// Items ranked by train popularity (ties by ascending id), masked per user.
pub fn mostpop_list(counts: &[u64], mask: &[bool], k: usize) -> Vec<usize> {
    let scores: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    topk_masked(&scores, k, Some(mask)).items
}
