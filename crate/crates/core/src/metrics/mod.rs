//! Ranking, accuracy and item-exposure metrics.

mod baselines;
mod exposure;
mod ranking;
mod report;
mod tradeoff;

pub use baselines::{mostpop_list, random_list};
pub use exposure::{aplt_at_k, coverage, delta_exp, exposure_counts, gini};
pub use ranking::{ndcg_at_k, recall_at_k, topk_masked, RecommendationList};
pub use report::{
    evaluate_lists, mean_recall, rank_users, CutoffMetrics, MetricsReport, RankedUsers, UserMetrics, CUTOFFS,
    METRIC_NAMES,
};
pub use tradeoff::{tradeoff, Direction, Tradeoff};
