use super::denoiser::Denoiser;
use super::schedule::DiffusionSchedule;
use crate::error::{Error, Result};
use crate::numerics::{Scalar, SeededRng};

/// `x_t = √ᾱ_t · x₀ + √(1 − ᾱ_t) · noise`, with `t = 0` returning `x₀`.
pub fn q_sample<F: Scalar>(x0: &[F], t: usize, noise: &[F], schedule: &DiffusionSchedule<F>) -> Result<Vec<F>> {
    schedule.check_step(t, true)?;
    if noise.len() != x0.len() {
        return Err(Error::InvalidInput(format!("noise has {} entries, x₀ has {}", noise.len(), x0.len())));
    }
    let ab = schedule.alpha_bar(t);
    let (a, b) = (ab.sqrt(), (F::one() - ab).sqrt());
    Ok(x0.iter().zip(noise).map(|(&x, &n)| a * x + b * n).collect())
}

/// Coefficients `(c_x0, c_xt, σ²)` of the Gaussian posterior
/// `q(x_{t−1} | x_t, x₀) = N(c_x0·x₀ + c_xt·x_t, σ²)`.
pub fn posterior_coefficients<F: Scalar>(t: usize, schedule: &DiffusionSchedule<F>) -> (F, F, F) {
    let beta = schedule.beta(t);
    let ab = schedule.alpha_bar(t);
    let ab_prev = schedule.alpha_bar(t - 1);
    let denom = F::one() - ab;
    let c_x0 = beta * ab_prev.sqrt() / denom;
    let c_xt = (F::one() - ab_prev) * schedule.alpha(t).sqrt() / denom;
    let var = beta * (F::one() - ab_prev) / denom;
    (c_x0, c_xt, var)
}

pub fn posterior_mean<F: Scalar>(x_t: &[F], z: &[F], t: usize, schedule: &DiffusionSchedule<F>) -> Vec<F> {
    let (c_x0, c_xt, _) = posterior_coefficients(t, schedule);
    x_t.iter().zip(z).map(|(&x, &z)| c_x0 * z + c_xt * x).collect()
}

/// One reverse step from `x_t` given the predicted clean vector `z`. Adds
/// `σ_t · noise` for `t > 1` when `stochastic`; the final step is always
/// deterministic and returns `z` itself.
pub fn posterior_step<F: Scalar>(
    x_t: &[F],
    z: &[F],
    t: usize,
    schedule: &DiffusionSchedule<F>,
    rng: &mut SeededRng,
    stochastic: bool,
) -> Result<Vec<F>> {
    schedule.check_step(t, false)?;
    if x_t.len() != z.len() {
        return Err(Error::InvalidInput("x_t and prediction differ in length".into()));
    }
    let mut mean = posterior_mean(x_t, z, t, schedule);
    if t > 1 && stochastic {
        let (_, _, var) = posterior_coefficients(t, schedule);
        let sigma = var.sqrt();
        for m in mean.iter_mut() {
            *m += sigma * F::lit(rng.normal());
        }
    }
    Ok(mean)
}

/// Where the reverse chain starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChainInit {
    /// `q_sample(history, T′, ε)`.
    #[default]
    CorruptedHistory,
    /// `ε ~ N(0, I)` regardless of history.
    PureNoise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub init: ChainInit,
    pub stochastic: bool,
    /// Abort when any score exceeds this magnitude.
    pub blowup_limit: Option<f64>,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { init: ChainInit::CorruptedHistory, stochastic: true, blowup_limit: None }
    }
}

pub const BLOWUP_LIMIT: f64 = 1e6;

/// Runs `t = T′ … 1`, calling `predict(x_t, t)` for the clean-vector estimate
/// at each step. With `T′ = 0` the history is passed through one prediction
/// at `t = 1` without corruption.
pub fn reverse_chain<F, P>(
    history: &[F],
    schedule: &DiffusionSchedule<F>,
    options: &SamplerOptions,
    rng: &mut SeededRng,
    mut predict: P,
) -> Result<Vec<F>>
where
    F: Scalar,
    P: FnMut(&[F], usize) -> Result<Vec<F>>,
{
    let guard = |x: &[F], step: usize| -> Result<()> {
        if let Some(limit) = options.blowup_limit {
            let worst = x.iter().fold(0.0f64, |m, v| {
                let a = v.as_f64().abs();
                if a.is_nan() { f64::INFINITY } else { m.max(a) }
            });
            if worst > limit {
                return Err(Error::GuidanceBlowup { step, magnitude: worst });
            }
        }
        Ok(())
    };
    let start = schedule.infer_steps();
    if start == 0 {
        let z = predict(history, 1)?;
        guard(&z, 1)?;
        return Ok(z);
    }
    let noise = rng.normal_vec::<F>(history.len());
    let mut x = match options.init {
        ChainInit::CorruptedHistory => q_sample(history, start, &noise, schedule)?,
        ChainInit::PureNoise => noise,
    };
    for t in (1..=start).rev() {
        let z = predict(&x, t)?;
        x = posterior_step(&x, &z, t, schedule, rng, options.stochastic)?;
        guard(&x, t)?;
    }
    Ok(x)
}

/// DiffRec-style unguided sampling; the result is a score per item.
pub fn sample_unguided<F: Scalar>(
    model: &Denoiser<F>,
    history: &[F],
    schedule: &DiffusionSchedule<F>,
    options: &SamplerOptions,
    rng: &mut SeededRng,
) -> Result<Vec<F>> {
    reverse_chain(history, schedule, options, rng, |x, t| model.denoise(x, t))
}
