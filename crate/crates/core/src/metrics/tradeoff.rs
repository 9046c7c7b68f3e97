use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

/// Relative fairness gain per unit of relative accuracy loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tradeoff {
    pub value: f64,
    /// Accuracy did not move; `value` is then `±∞` (or 0 with no gain).
    pub zero_accuracy_loss: bool,
}

/// `T_m = gain / loss` with gain oriented so improvement is positive and
/// `loss = (NDCG − NDCG′) / NDCG`.
pub fn tradeoff(
    direction: Direction,
    base_metric: f64,
    method_metric: f64,
    base_ndcg: f64,
    method_ndcg: f64,
) -> Result<Tradeoff> {
    if !(base_ndcg > 0.0) {
        return Err(Error::UndefinedMetric(format!("baseline NDCG must be positive, got {base_ndcg}")));
    }
    if base_metric == 0.0 {
        return Err(Error::UndefinedMetric("baseline fairness metric is zero".into()));
    }
    let gain = match direction {
        Direction::LowerIsBetter => (base_metric - method_metric) / base_metric,
        Direction::HigherIsBetter => (method_metric - base_metric) / base_metric,
    };
    let loss = (base_ndcg - method_ndcg) / base_ndcg;
    if loss == 0.0 {
        let value = if gain == 0.0 { 0.0 } else { f64::INFINITY.copysign(gain) };
        return Ok(Tradeoff { value, zero_accuracy_loss: true });
    }
    Ok(Tradeoff { value: gain / loss, zero_accuracy_loss: false })
}
