use crate::error::Result;
use crate::numerics::{Activation, DenseNet, ForwardCache, NetGrads, Scalar, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Main,
    Weak,
}

/// Sinusoidal embedding of the timestep: `[cos(t·f_k)…, sin(t·f_k)…]` with
/// `f_k = 10000^(−k/half)`; odd widths are zero-padded.
pub fn timestep_embedding<F: Scalar>(t: usize, width: usize) -> Vec<F> {
    let half = width / 2;
    let mut out = vec![F::zero(); width];
    for k in 0..half {
        let freq = (-(10000f64.ln()) * k as f64 / half as f64).exp();
        let arg = t as f64 * freq;
        out[k] = F::lit(arg.cos());
        out[half + k] = F::lit(arg.sin());
    }
    out
}

/// x₀-predicting MLP over `[x_t ; emb(t)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Denoiser<F> {
    pub net: DenseNet<F>,
    pub emb_dim: usize,
    pub role: Role,
}

pub const DEFAULT_EMB_DIM: usize = 10;

impl<F: Scalar> Denoiser<F> {
    /// Tanh hidden layers, identity output.
    pub fn new(n_items: usize, hidden: &[usize], emb_dim: usize, rng: &mut SeededRng) -> Result<Self> {
        let mut dims = vec![n_items + emb_dim];
        dims.extend_from_slice(hidden);
        dims.push(n_items);
        let net = DenseNet::init(&dims, Activation::Tanh, Activation::Identity, rng)?;
        Ok(Denoiser { net, emb_dim, role: Role::Main })
    }

    pub fn from_net(net: DenseNet<F>, emb_dim: usize, role: Role) -> Self {
        Denoiser { net, emb_dim, role }
    }

    pub fn n_items(&self) -> usize {
        self.net.out_dim()
    }

    /// Copy tagged as the frozen guidance model.
    pub fn frozen_copy(&self) -> Self {
        Denoiser { net: self.net.clone(), emb_dim: self.emb_dim, role: Role::Weak }
    }

    fn input(&self, x_t: &[F], t: usize) -> Vec<F> {
        let mut input = Vec::with_capacity(x_t.len() + self.emb_dim);
        input.extend_from_slice(x_t);
        input.extend(timestep_embedding::<F>(t, self.emb_dim));
        input
    }

    pub fn denoise(&self, x_t: &[F], t: usize) -> Result<Vec<F>> {
        self.net.predict(&self.input(x_t, t))
    }

    pub fn denoise_with_cache(&self, x_t: &[F], t: usize) -> Result<(Vec<F>, ForwardCache<F>)> {
        self.net.forward(&self.input(x_t, t))
    }

    /// Accumulates parameter gradients for `dL/dẑ = grad_z`.
    pub fn backward_accumulate(&self, cache: &ForwardCache<F>, grad_z: &[F], grads: &mut NetGrads<F>) -> Result<()> {
        self.net.backward_accumulate(cache, grad_z, grads).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_return_bias() {
        let mut rng = SeededRng::new(1);
        let mut d = Denoiser::<f64>::new(3, &[], 4, &mut rng).unwrap();
        for l in d.net.layers_mut() {
            l.weight.iter_mut().for_each(|w| *w = 0.0);
            l.bias.copy_from_slice(&[0.5, -1.0, 2.0]);
        }
        assert_eq!(d.denoise(&[1.0, 0.0, 1.0], 2).unwrap(), vec![0.5, -1.0, 2.0]);
        assert_eq!(d.denoise(&[9.0, 9.0, 9.0], 1).unwrap(), vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn deterministic_and_time_dependent() {
        let mut rng = SeededRng::new(2);
        let d = Denoiser::<f64>::new(6, &[8], DEFAULT_EMB_DIM, &mut rng).unwrap();
        let x = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0];
        let a = d.denoise(&x, 3).unwrap();
        let b = d.denoise(&x, 3).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_ne!(a, d.denoise(&x, 4).unwrap());
        assert!(d.denoise(&x[..5], 3).is_err());
    }

    #[test]
    fn embedding_shape() {
        let e = timestep_embedding::<f64>(0, 10);
        assert_eq!(&e[..5], &[1.0; 5]);
        assert_eq!(&e[5..], &[0.0; 5]);
        assert_eq!(timestep_embedding::<f64>(3, 5).len(), 5);
    }
}
