use crate::error::{Error, Result};
use crate::numerics::Scalar;

/// Linear variance schedule over `T` steps plus the number of steps `T′`
/// walked back at inference.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule<F> {
    steps: usize,
    infer_steps: usize,
    betas: Vec<F>,
    alphas: Vec<F>,
    alpha_bars: Vec<F>,
}

pub fn build_schedule<F: Scalar>(
    steps: usize,
    infer_steps: usize,
    beta_start: f64,
    beta_end: f64,
) -> Result<DiffusionSchedule<F>> {
    if steps == 0 {
        return Err(Error::hyper("steps", "at least one diffusion step is required"));
    }
    if infer_steps > steps {
        return Err(Error::hyper("infer_steps", format!("{infer_steps} exceeds steps = {steps}")));
    }
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(Error::hyper(
            "beta",
            format!("need 0 < beta_start ≤ beta_end < 1, got {beta_start}, {beta_end}"),
        ));
    }
    let betas: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                beta_start
            } else {
                beta_start + (beta_end - beta_start) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let mut running = 1.0;
    let alpha_bars: Vec<f64> = betas
        .iter()
        .map(|b| {
            running *= 1.0 - b;
            running
        })
        .collect();
    Ok(DiffusionSchedule {
        steps,
        infer_steps,
        betas: betas.iter().map(|&b| F::lit(b)).collect(),
        alphas: betas.iter().map(|&b| F::lit(1.0 - b)).collect(),
        alpha_bars: alpha_bars.into_iter().map(F::lit).collect(),
    })
}

impl<F: Scalar> DiffusionSchedule<F> {
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn infer_steps(&self) -> usize {
        self.infer_steps
    }

    pub fn with_infer_steps(mut self, infer_steps: usize) -> Result<Self> {
        if infer_steps > self.steps {
            return Err(Error::hyper("infer_steps", format!("{infer_steps} exceeds steps = {}", self.steps)));
        }
        self.infer_steps = infer_steps;
        Ok(self)
    }

    /// `β_t` for `t ∈ [1, T]`.
    pub fn beta(&self, t: usize) -> F {
        self.betas[t - 1]
    }

    pub fn alpha(&self, t: usize) -> F {
        self.alphas[t - 1]
    }

    /// `ᾱ_t`, with `ᾱ_0 = 1`.
    pub fn alpha_bar(&self, t: usize) -> F {
        if t == 0 {
            F::one()
        } else {
            self.alpha_bars[t - 1]
        }
    }

    pub fn alpha_bars(&self) -> &[F] {
        &self.alpha_bars
    }

    pub(crate) fn check_step(&self, t: usize, allow_zero: bool) -> Result<()> {
        if t > self.steps || (t == 0 && !allow_zero) {
            return Err(Error::InvalidInput(format!("timestep {t} outside [1, {}]", self.steps)));
        }
        Ok(())
    }
}
