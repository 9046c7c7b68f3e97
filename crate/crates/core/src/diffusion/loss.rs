use super::denoiser::Denoiser;
use super::sampling::q_sample;
use super::schedule::DiffusionSchedule;
use crate::error::{Error, Result};
use crate::numerics::{NetGrads, Scalar, SeededRng};

/// Timestep and Gaussian noise used to corrupt one training example.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionDraw<F> {
    pub t: usize,
    pub noise: Vec<F>,
}

/// Uniform `t ∈ [1, T]` and standard normal noise for each example.
pub fn draw_batch<F: Scalar>(
    rng: &mut SeededRng,
    batch: usize,
    n_items: usize,
    schedule: &DiffusionSchedule<F>,
) -> Vec<DiffusionDraw<F>> {
    (0..batch)
        .map(|_| {
            let t = 1 + rng.below(schedule.steps());
            DiffusionDraw { t, noise: rng.normal_vec(n_items) }
        })
        .collect()
}

/// Squared reconstruction error `‖z − x₀‖²` and its gradient `2(z − x₀)`.
pub fn reconstruction_error<F: Scalar>(z: &[F], x0: &[F]) -> (F, Vec<F>) {
    let two = F::lit(2.0);
    let mut loss = F::zero();
    let grad = z
        .iter()
        .zip(x0)
        .map(|(&a, &b)| {
            let d = a - b;
            loss += d * d;
            two * d
        })
        .collect();
    (loss, grad)
}

/// `L_base` for fixed draws: batch mean of `‖denoise(x_t, t) − x₀‖²`.
pub fn base_loss_fixed<F: Scalar>(
    model: &Denoiser<F>,
    batch: &[Vec<F>],
    draws: &[DiffusionDraw<F>],
    schedule: &DiffusionSchedule<F>,
) -> Result<(F, NetGrads<F>)> {
    if batch.is_empty() {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    if draws.len() != batch.len() {
        return Err(Error::InvalidInput("one draw per example is required".into()));
    }
    let scale = F::one() / F::lit(batch.len() as f64);
    let mut grads = NetGrads::zeros_like(&model.net);
    let mut total = F::zero();
    for (x0, draw) in batch.iter().zip(draws) {
        let x_t = q_sample(x0, draw.t, &draw.noise, schedule)?;
        let (z, cache) = model.denoise_with_cache(&x_t, draw.t)?;
        let (l, mut g) = reconstruction_error(&z, x0);
        total += l;
        g.iter_mut().for_each(|v| *v *= scale);
        model.backward_accumulate(&cache, &g, &mut grads)?;
    }
    let loss = total * scale;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss(format!("L_base = {loss}")));
    }
    Ok((loss, grads))
}

/// `L_base` with fresh uniform timesteps and noise drawn from `rng`.
pub fn base_loss<F: Scalar>(
    model: &Denoiser<F>,
    batch: &[Vec<F>],
    rng: &mut SeededRng,
    schedule: &DiffusionSchedule<F>,
) -> Result<(F, NetGrads<F>)> {
    if batch.is_empty() {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    let draws = draw_batch(rng, batch.len(), batch[0].len(), schedule);
    base_loss_fixed(model, batch, &draws, schedule)
}
