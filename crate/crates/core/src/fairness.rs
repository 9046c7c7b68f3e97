//! Popularity-aware supervision: the adaptive target distribution over
//! popularity bins and the hinge-based popularity regularizer.

use crate::data::PopBin;
use crate::error::{Error, Result};
use crate::metrics::topk_masked;
use crate::numerics::{entropy_unchecked, sigmoid, Scalar};

fn check_distribution(name: &str, p: &[f64; 3]) -> Result<()> {
    let total: f64 = p.iter().sum();
    if p.iter().any(|v| !(*v >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::hyper(name, format!("{p:?} is not a probability distribution")));
    }
    Ok(())
}

/// `T = γ·H̄ + (1 − γ)·Q` with `γ = 1 − H̄^h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetDistribution {
    pub target: [f64; 3],
    pub gamma: f64,
    pub mean_history: [f64; 3],
    pub prior: [f64; 3],
}

impl TargetDistribution {
    pub fn from_mean_history(mean_history: [f64; 3], prior: [f64; 3]) -> Result<Self> {
        check_distribution("Q", &prior)?;
        let gamma = 1.0 - mean_history[0];
        let target = [0, 1, 2].map(|c| gamma * mean_history[c] + (1.0 - gamma) * prior[c]);
        Ok(TargetDistribution { target, gamma, mean_history, prior })
    }

    pub fn entropy(&self) -> f64 {
        entropy_unchecked(&self.target)
    }
}

/// Target for a batch of users given their history distributions `H_u`.
pub fn target_distribution(histories: &[[f64; 3]], prior: [f64; 3]) -> Result<TargetDistribution> {
    if histories.is_empty() {
        return Err(Error::InvalidInput("target distribution of an empty batch".into()));
    }
    let n = histories.len() as f64;
    let mut mean = [0.0; 3];
    for h in histories {
        for c in 0..3 {
            mean[c] += h[c];
        }
    }
    TargetDistribution::from_mean_history(mean.map(|v| v / n), prior)
}

/// Share of each bin among the top-`k` scores (ties by ascending item id),
/// skipping `exclude`d items.
pub fn rec_distribution_hard<F: Scalar>(scores: &[F], k: usize, bins: &[PopBin], exclude: Option<&[bool]>) -> [f64; 3] {
    let list = topk_masked(scores, k, exclude);
    let mut counts = [0usize; 3];
    for &i in &list.items {
        counts[bins[i].index()] += 1;
    }
    counts.map(|c| c as f64 / k as f64)
}

/// `k`-th largest score among items not excluded (the smallest eligible
/// score if fewer than `k` are eligible).
pub fn kth_largest<F: Scalar>(scores: &[F], k: usize, exclude: Option<&[bool]>) -> Option<F> {
    let mut eligible: Vec<F> =
        scores.iter().enumerate().filter(|(i, _)| exclude.is_none_or(|m| !m[*i])).map(|(_, &s)| s).collect();
    if eligible.is_empty() || k == 0 {
        return None;
    }
    let k = k.min(eligible.len());
    eligible.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Some(eligible[k - 1])
}

/// Differentiable bin distribution of a soft top-`k` membership
/// `p_i = σ((z_i − θ_k)/τ)`, with `θ_k` held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftRecDistribution<F> {
    pub r: [F; 3],
    pub threshold: F,
    membership: Vec<F>,
    mass: F,
    tau: F,
}

pub fn rec_distribution_soft<F: Scalar>(
    scores: &[F],
    k: usize,
    bins: &[PopBin],
    tau_pop: F,
    exclude: Option<&[bool]>,
    threshold: Option<F>,
) -> Result<SoftRecDistribution<F>> {
    if !(tau_pop > F::zero()) {
        return Err(Error::hyper("tau_pop", format!("must be positive, got {tau_pop}")));
    }
    if bins.len() != scores.len() || exclude.is_some_and(|m| m.len() != scores.len()) {
        return Err(Error::InvalidInput("scores, bins and exclusion mask differ in length".into()));
    }
    let threshold = match threshold {
        Some(t) => t,
        None => kth_largest(scores, k, exclude).ok_or_else(|| Error::InvalidInput("no eligible items".into()))?,
    };
    let membership: Vec<F> = scores
        .iter()
        .enumerate()
        .map(|(i, &z)| if exclude.is_some_and(|m| m[i]) { F::zero() } else { sigmoid((z - threshold) / tau_pop) })
        .collect();
    let mut per_bin = [F::zero(); 3];
    for (p, b) in membership.iter().zip(bins) {
        per_bin[b.index()] += *p;
    }
    let mass = per_bin[0] + per_bin[1] + per_bin[2];
    if !(mass > F::zero()) {
        return Err(Error::InvalidInput("soft top-k has zero mass".into()));
    }
    Ok(SoftRecDistribution { r: per_bin.map(|v| v / mass), threshold, membership, mass, tau: tau_pop })
}

impl<F: Scalar> SoftRecDistribution<F> {
    /// `dL/dz` given `dL/dr`.
    pub fn backward(&self, grad_r: &[F; 3], bins: &[PopBin]) -> Vec<F> {
        let weighted = grad_r[0] * self.r[0] + grad_r[1] * self.r[1] + grad_r[2] * self.r[2];
        self.membership
            .iter()
            .zip(bins)
            .map(|(&p, b)| {
                if p.is_zero() {
                    return F::zero();
                }
                let dr_dp = (grad_r[b.index()] - weighted) / self.mass;
                dr_dp * p * (F::one() - p) / self.tau
            })
            .collect()
    }
}

/// Value and per-term breakdown of the popularity regularizer, with the
/// gradient with respect to every user's `r_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopLoss<F> {
    pub total: F,
    pub over_high: F,
    pub under_low: F,
    pub balance: F,
    pub grads: Vec<[F; 3]>,
}

/// `mean_u [r_u^h − T^h]₊ + mean_u [T^ℓ − r_u^ℓ]₊ + [H(T) − H(r̄)]₊`.
pub fn pop_loss<F: Scalar>(rs: &[[F; 3]], target: &TargetDistribution) -> Result<PopLoss<F>> {
    if rs.is_empty() {
        return Err(Error::InvalidInput("popularity loss of an empty batch".into()));
    }
    let b = F::lit(rs.len() as f64);
    let inv_b = F::one() / b;
    let t_high = F::lit(target.target[0]);
    let t_low = F::lit(target.target[2]);
    let mut grads = vec![[F::zero(); 3]; rs.len()];
    let mut over_high = F::zero();
    let mut under_low = F::zero();
    let mut mean = [F::zero(); 3];
    for (r, g) in rs.iter().zip(grads.iter_mut()) {
        let over = r[0] - t_high;
        if over > F::zero() {
            over_high += over;
            g[0] += inv_b;
        }
        let under = t_low - r[2];
        if under > F::zero() {
            under_low += under;
            g[2] -= inv_b;
        }
        for c in 0..3 {
            mean[c] += r[c] * inv_b;
        }
    }
    over_high *= inv_b;
    under_low *= inv_b;
    // identical rows average to themselves exactly, so L_pop is 0 at r_u = T
    for c in 0..3 {
        if rs.iter().all(|r| r[c] == rs[0][c]) {
            mean[c] = rs[0][c];
        }
    }
    let gap = F::lit(target.entropy()) - entropy_unchecked(&mean);
    let balance = gap.max(F::zero());
    if gap > F::zero() {
        let floor = F::lit(1e-12);
        let dh: [F; 3] = mean.map(|m| (m.max(floor).ln() + F::one()) * inv_b);
        for g in grads.iter_mut() {
            for c in 0..3 {
                g[c] += dh[c];
            }
        }
    }
    Ok(PopLoss { total: over_high + under_low + balance, over_high, under_low, balance, grads })
}
