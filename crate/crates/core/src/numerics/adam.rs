use super::net::{DenseNet, NetGrads};
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Bias-corrected Adam moments for one network.
#[derive(Debug, Clone)]
pub struct AdamState<F> {
    pub config: AdamConfig,
    m: NetGrads<F>,
    v: NetGrads<F>,
    step: u64,
}

impl<F: Scalar> AdamState<F> {
    pub fn new(net: &DenseNet<F>, config: AdamConfig) -> Self {
        AdamState { config, m: NetGrads::zeros_like(net), v: NetGrads::zeros_like(net), step: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &NetGrads<F> {
        &self.m
    }

    pub fn second_moment(&self) -> &NetGrads<F> {
        &self.v
    }

    /// Applies one update. Nothing is modified if a gradient entry is NaN or
    /// infinite; the error names the offending layer.
    pub fn update(&mut self, net: &mut DenseNet<F>, grads: &NetGrads<F>) -> Result<()> {
        if grads.weight.len() != self.m.weight.len()
            || grads.weight.iter().zip(&self.m.weight).any(|(a, b)| a.len() != b.len())
            || grads.bias.iter().zip(&self.m.bias).any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::InvalidInput("gradient shapes do not match optimizer state".into()));
        }
        if let Some(layer) = grads.first_non_finite_layer() {
            return Err(Error::Divergence { layer });
        }
        self.step += 1;
        let c = &self.config;
        let (b1, b2) = (F::lit(c.beta1), F::lit(c.beta2));
        let bc1 = F::lit(1.0 - c.beta1.powi(self.step as i32));
        let bc2 = F::lit(1.0 - c.beta2.powi(self.step as i32));
        let (lr, eps) = (F::lit(c.lr), F::lit(c.eps));
        let one = F::one();

        for (i, layer) in net.layers_mut().iter_mut().enumerate() {
            let pairs = [
                (&mut layer.weight, &grads.weight[i], &mut self.m.weight[i], &mut self.v.weight[i]),
                (&mut layer.bias, &grads.bias[i], &mut self.m.bias[i], &mut self.v.bias[i]),
            ];
            for (params, g, m, v) in pairs {
                for j in 0..params.len() {
                    m[j] = b1 * m[j] + (one - b1) * g[j];
                    v[j] = b2 * v[j] + (one - b2) * g[j] * g[j];
                    let m_hat = m[j] / bc1;
                    let v_hat = v[j] / bc2;
                    params[j] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}
