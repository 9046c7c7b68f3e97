use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Temperature-scaled softmax `exp(z/τ) / Σ exp(z/τ)`, computed with
/// max-subtraction.
pub fn softmax_tau<F: Scalar>(z: &[F], tau: F) -> Result<Vec<F>> {
    if !(tau > F::zero()) || !tau.is_finite() {
        return Err(Error::hyper("tau", format!("temperature must be positive, got {tau}")));
    }
    if z.is_empty() {
        return Err(Error::InvalidInput("softmax of an empty vector".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("softmax input must be finite".into()));
    }
    let max = z.iter().fold(F::neg_infinity(), |m, &v| m.max(v));
    let mut out: Vec<F> = z.iter().map(|&v| ((v - max) / tau).exp()).collect();
    let total: F = out.iter().copied().sum();
    for p in out.iter_mut() {
        *p /= total;
    }
    Ok(out)
}

fn sum_tolerance<F: Scalar>(n: usize) -> f64 {
    1e-9f64.max(F::epsilon().as_f64() * 8.0 * n as f64)
}

/// Shannon entropy in nats, with `0 · ln 0 = 0`.
pub fn shannon_entropy<F: Scalar>(p: &[F]) -> Result<F> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some(v) = p.iter().find(|v| !(**v >= F::zero()) || !v.is_finite()) {
        return Err(Error::InvalidDistribution(format!("entry {v} is negative or non-finite")));
    }
    let total: f64 = p.iter().map(|v| v.as_f64()).sum();
    if (total - 1.0).abs() > sum_tolerance::<F>(p.len()) {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(entropy_unchecked(p))
}

pub(crate) fn entropy_unchecked<F: Scalar>(p: &[F]) -> F {
    p.iter().filter(|v| **v > F::zero()).fold(F::zero(), |acc, &v| acc - v * v.ln())
}

/// Gradient of `H(softmax(z/τ))` with respect to `z`, given the softmax output
/// `p` and its entropy `h`: `-(1/τ) p_j (ln p_j + H)`.
pub fn softmax_entropy_grad<F: Scalar>(p: &[F], h: F, tau: F) -> Vec<F> {
    p.iter()
        .map(|&pj| if pj > F::zero() { -(pj * (pj.ln() + h)) / tau } else { F::zero() })
        .collect()
}
