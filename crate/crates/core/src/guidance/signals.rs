use crate::error::{Error, Result};
use crate::numerics::{entropy_unchecked, l2_norm, softmax_entropy_grad, softmax_tau, Scalar};

/// Stabilizer in the norm-ratio signal.
pub const RATIO_EPS: f64 = 1e-8;

fn same_len<F>(a: &[F], b: &[F]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("vectors differ in length: {} vs {}", a.len(), b.len())));
    }
    Ok(())
}

/// `w·z₁ + (1 − w)·z₀`. Exact at `w ∈ {0, 1}` and where `z₁ = z₀`, which
/// rounding alone would not guarantee.
pub fn fuse<F: Scalar>(z1: &[F], z0: &[F], w: F) -> Result<Vec<F>> {
    same_len(z1, z0)?;
    if w == F::one() {
        return Ok(z1.to_vec());
    }
    if w.is_zero() {
        return Ok(z0.to_vec());
    }
    let v = F::one() - w;
    Ok(z1.iter().zip(z0).map(|(&a, &b)| if a == b { a } else { w * a + v * b }).collect())
}

/// Main/weak discrepancy features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceSignals<F> {
    /// `‖z₁ − z₀‖₁`
    pub d1: F,
    /// `‖z₁‖₂ / (‖z₀‖₂ + ε)`
    pub d2: F,
    /// `H_τ(z₀) − H_τ(z₁)`, in nats.
    pub d3: F,
}

/// Signals plus their gradients with respect to `z₁` (`z₀` is treated as a
/// constant everywhere).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalsWithGrad<F> {
    pub signals: GuidanceSignals<F>,
    pub grad_d1: Vec<F>,
    pub grad_d2: Vec<F>,
    pub grad_d3: Vec<F>,
}

pub fn signals<F: Scalar>(z1: &[F], z0: &[F], tau: F, eps: F) -> Result<GuidanceSignals<F>> {
    Ok(signals_with_grad(z1, z0, tau, eps)?.signals)
}

pub fn signals_with_grad<F: Scalar>(z1: &[F], z0: &[F], tau: F, eps: F) -> Result<SignalsWithGrad<F>> {
    same_len(z1, z0)?;
    let mut d1 = F::zero();
    let grad_d1: Vec<F> = z1
        .iter()
        .zip(z0)
        .map(|(&a, &b)| {
            let d = a - b;
            d1 += d.abs();
            if d > F::zero() {
                F::one()
            } else if d < F::zero() {
                -F::one()
            } else {
                F::zero()
            }
        })
        .collect();

    let n1 = l2_norm(z1);
    let denom = l2_norm(z0) + eps;
    let d2 = n1 / denom;
    let grad_d2 = if n1 > F::zero() {
        z1.iter().map(|&a| a / (n1 * denom)).collect()
    } else {
        vec![F::zero(); z1.len()]
    };

    let p1 = softmax_tau(z1, tau)?;
    let p0 = softmax_tau(z0, tau)?;
    let h1 = entropy_unchecked(&p1);
    let h0 = entropy_unchecked(&p0);
    let grad_d3 = softmax_entropy_grad(&p1, h1, tau).into_iter().map(|g| -g).collect();

    Ok(SignalsWithGrad { signals: GuidanceSignals { d1, d2, d3: h0 - h1 }, grad_d1, grad_d2, grad_d3 })
}

/// `z₁ᵀ m_tail`.
pub fn tail_score<F: Scalar>(z1: &[F], tail: &[bool]) -> Result<F> {
    if z1.len() != tail.len() {
        return Err(Error::InvalidInput(format!("tail mask has {} entries, scores {}", tail.len(), z1.len())));
    }
    Ok(z1.iter().zip(tail).filter(|(_, &t)| t).map(|(&z, _)| z).sum())
}
