/// Outcome of checking a validation history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopDecision {
    pub stop: bool,
    /// 1-based epoch of the first maximum.
    pub best_epoch: usize,
}

/// Stops once the best value is `patience` or more epochs old.
pub fn early_stop(history: &[f64], patience: usize) -> StopDecision {
    assert!(!history.is_empty(), "early_stop needs at least one epoch");
    let mut best = 0;
    for (i, &v) in history.iter().enumerate() {
        if v > history[best] {
            best = i;
        }
    }
    let since = history.len() - 1 - best;
    StopDecision { stop: since >= patience, best_epoch: best + 1 }
}
