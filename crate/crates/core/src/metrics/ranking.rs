use crate::numerics::Scalar;

/// Ranked top-K items for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub items: Vec<usize>,
    pub scores: Vec<f64>,
    /// Fewer than K items were eligible.
    pub short: bool,
}

/// Highest-`k` scores among items not excluded, ties by ascending item id.
pub fn topk_masked<F: Scalar>(scores: &[F], k: usize, exclude: Option<&[bool]>) -> RecommendationList {
    let mut eligible: Vec<usize> = (0..scores.len()).filter(|&i| exclude.is_none_or(|m| !m[i])).collect();
    let cmp = |a: &usize, b: &usize| scores[*b].as_f64().total_cmp(&scores[*a].as_f64()).then(a.cmp(b));
    let short = eligible.len() < k;
    if !short && k < eligible.len() && k > 0 {
        eligible.select_nth_unstable_by(k - 1, cmp);
        eligible.truncate(k);
    }
    eligible.sort_by(cmp);
    eligible.truncate(k);
    let scores = eligible.iter().map(|&i| scores[i].as_f64()).collect();
    RecommendationList { items: eligible, scores, short }
}

fn discount(position: usize) -> f64 {
    1.0 / ((position + 2) as f64).log2()
}

/// Binary-relevance NDCG@K; `None` when the user has no target items.
pub fn ndcg_at_k(list: &[usize], relevant: &[usize], k: usize) -> Option<f64> {
    if relevant.is_empty() {
        return None;
    }
    let dcg: f64 = list.iter().take(k).enumerate().filter(|(_, i)| relevant.contains(i)).fold(0.0, |acc, (p, _)| acc + discount(p));
    let idcg: f64 = (0..k.min(relevant.len())).map(discount).sum();
    Some(dcg / idcg)
}

/// Hits in the top K over `min(K, |relevant|)`; `None` without targets.
pub fn recall_at_k(list: &[usize], relevant: &[usize], k: usize) -> Option<f64> {
    if relevant.is_empty() {
        return None;
    }
    let hits = list.iter().take(k).filter(|i| relevant.contains(i)).count();
    Some(hits as f64 / k.min(relevant.len()) as f64)
}
