use super::aan::GuidanceNet;
use super::signals::fuse;
use crate::diffusion::{reverse_chain, DiffusionSchedule, Denoiser, SamplerOptions, BLOWUP_LIMIT};
use crate::error::Result;
use crate::numerics::{Scalar, SeededRng};

/// Source of the per-step fusion weight during guided sampling.
pub trait GuidanceWeight<F: Scalar> {
    fn weight(&self, z1: &[F], z0: &[F], tail: &[bool]) -> Result<F>;
}

/// The same weight at every step (fixed autoguidance, or the "no AAN"
/// ablation at `w = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantWeight<F>(pub F);

impl<F: Scalar> GuidanceWeight<F> for ConstantWeight<F> {
    fn weight(&self, _: &[F], _: &[F], _: &[bool]) -> Result<F> {
        Ok(self.0)
    }
}

impl<F: Scalar> GuidanceWeight<F> for GuidanceNet<F> {
    fn weight(&self, z1: &[F], z0: &[F], tail: &[bool]) -> Result<F> {
        Ok(self.forward(z1, z0, tail, &self.inference_scaling())?.w)
    }
}

fn guarded(options: &SamplerOptions) -> SamplerOptions {
    SamplerOptions { blowup_limit: Some(options.blowup_limit.unwrap_or(BLOWUP_LIMIT)), ..*options }
}

/// Guided reverse chain: at each step both denoisers predict, the weight
/// source picks `w`, and the fused prediction drives the posterior step.
#[allow(clippy::too_many_arguments)]
pub fn guided_sample<F: Scalar>(
    main: &Denoiser<F>,
    weak: &Denoiser<F>,
    weight: &dyn GuidanceWeight<F>,
    history: &[F],
    schedule: &DiffusionSchedule<F>,
    tail: &[bool],
    options: &SamplerOptions,
    rng: &mut SeededRng,
) -> Result<Vec<F>> {
    reverse_chain(history, schedule, &guarded(options), rng, |x, t| {
        let z1 = main.denoise(x, t)?;
        let z0 = weak.denoise(x, t)?;
        let w = weight.weight(&z1, &z0, tail)?;
        fuse(&z1, &z0, w)
    })
}

/// Fixed-weight autoguidance.
pub fn ag_sample<F: Scalar>(
    main: &Denoiser<F>,
    weak: &Denoiser<F>,
    w: F,
    history: &[F],
    schedule: &DiffusionSchedule<F>,
    options: &SamplerOptions,
    rng: &mut SeededRng,
) -> Result<Vec<F>> {
    reverse_chain(history, schedule, &guarded(options), rng, |x, t| {
        fuse(&main.denoise(x, t)?, &weak.denoise(x, t)?, w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{build_schedule, sample_unguided};
    use crate::error::Error;

    fn bits(v: &[f64]) -> Vec<u64> {
        v.iter().map(|x| x.to_bits()).collect()
    }

    #[test]
    fn unit_weight_equals_unguided_main() {
        let mut rng = SeededRng::new(1);
        let main = Denoiser::<f64>::new(6, &[8], 4, &mut rng).unwrap();
        let weak = Denoiser::<f64>::new(6, &[8], 4, &mut rng).unwrap();
        let s = build_schedule(5, 3, 1e-3, 0.05).unwrap();
        let h = [1.0, 0.0, 0.0, 1.0, 1.0, 0.0];
        let opts = SamplerOptions::default();
        let a = guided_sample(&main, &weak, &ConstantWeight(1.0), &h, &s, &[false; 6], &opts, &mut SeededRng::new(3)).unwrap();
        let b = sample_unguided(&main, &h, &s, &opts, &mut SeededRng::new(3)).unwrap();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn blowup_is_reported() {
        let mut rng = SeededRng::new(1);
        let main = Denoiser::<f64>::new(3, &[4], 4, &mut rng).unwrap();
        let mut weak = main.clone();
        for l in weak.net.layers_mut() {
            l.bias.iter_mut().for_each(|b| *b -= 1.0);
        }
        let s = build_schedule(3, 2, 1e-3, 0.05).unwrap();
        let err = ag_sample(&main, &weak, 1e9, &[1.0, 0.0, 1.0], &s, &SamplerOptions::default(), &mut rng).unwrap_err();
        assert!(matches!(err, Error::GuidanceBlowup { step: 2, .. }));
    }
}
