use super::load::RawEvent;
use crate::numerics::SeededRng;

/// Parameters of a clustered Zipf implicit-feedback generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub users: usize,
    pub items: usize,
    pub mean_per_user: usize,
    /// Zipf exponent of item popularity.
    pub exponent: f64,
    /// Number of latent taste clusters shared by users and items.
    pub clusters: usize,
    /// Preference multiplier for items in the user's own cluster.
    pub affinity: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec { users: 500, items: 200, mean_per_user: 20, exponent: 1.2, clusters: 8, affinity: 6.0, seed: 7 }
    }
}

/// Draws distinct items per user with probability proportional to
/// `rank^-exponent`, boosted for the user's cluster. Item ids are a random
/// permutation of popularity rank. Each user's events get timestamps in a
/// random order, so popular items are not systematically consumed first.
pub fn zipf_events(spec: &SyntheticSpec) -> Vec<RawEvent> {
    let mut rng = SeededRng::new(spec.seed);
    let mut rank_of: Vec<usize> = (0..spec.items).collect();
    rng.shuffle(&mut rank_of);
    let pop: Vec<f64> = rank_of.iter().map(|&r| ((r + 1) as f64).powf(-spec.exponent)).collect();
    let clusters = spec.clusters.max(1);
    let item_cluster: Vec<usize> = (0..spec.items).map(|_| rng.below(clusters)).collect();

    let lo = (spec.mean_per_user * 3 / 4).max(1);
    let hi = (spec.mean_per_user * 5 / 4).max(lo).min(spec.items);
    let mut events = Vec::new();
    for u in 0..spec.users {
        let c = rng.below(clusters);
        let mut weights: Vec<f64> =
            (0..spec.items).map(|i| pop[i] * if item_cluster[i] == c { spec.affinity } else { 1.0 }).collect();
        let n = (lo + rng.below(hi - lo + 1)).min(spec.items);
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        for &step in &order {
            let total: f64 = weights.iter().sum();
            let mut x = rng.uniform() * total;
            let mut pick = spec.items - 1;
            for (i, &w) in weights.iter().enumerate() {
                if w > 0.0 && x < w {
                    pick = i;
                    break;
                }
                x -= w;
            }
            while weights[pick] == 0.0 {
                pick -= 1;
            }
            weights[pick] = 0.0;
            events.push(RawEvent::new(format!("{u}"), format!("{pick}"), (u * 1000 + step) as i64));
        }
    }
    events
}
