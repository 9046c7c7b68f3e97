use super::signals::{signals_with_grad, tail_score, GuidanceSignals, SignalsWithGrad, RATIO_EPS};
use crate::error::{Error, Result};
use crate::numerics::{open_sigmoid, open_sigmoid_grad, Activation, DenseNet, ForwardCache, NetGrads, Scalar, SeededRng};

/// Which discrepancy signals enter the network input; a disabled signal is
/// fed as a constant zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalMask {
    pub d1: bool,
    pub d2: bool,
    pub d3: bool,
}

impl Default for SignalMask {
    fn default() -> Self {
        SignalMask { d1: true, d2: true, d3: true }
    }
}

/// How the tail score enters the bonus sigmoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailScaling<F> {
    /// `σ(s_tail)` as is.
    Raw,
    /// `σ((s_tail − mean) / (std + 1e-8))`.
    Standardized { mean: F, std: F },
}

impl<F: Scalar> TailScaling<F> {
    /// Returns the transformed score and `d(transformed)/d(s_tail)`.
    pub fn apply(&self, s: F) -> (F, F) {
        match *self {
            TailScaling::Raw => (s, F::one()),
            TailScaling::Standardized { mean, std } => {
                let inv = F::one() / (std + F::lit(1e-8));
                ((s - mean) * inv, inv)
            }
        }
    }

    /// Mean and population standard deviation of a batch of tail scores.
    pub fn from_batch(scores: &[F]) -> Self {
        let n = F::lit(scores.len().max(1) as f64);
        let mean = scores.iter().copied().sum::<F>() / n;
        let var = scores.iter().map(|&s| (s - mean) * (s - mean)).sum::<F>() / n;
        TailScaling::Standardized { mean, std: var.sqrt() }
    }
}

/// `[1 + (w_max − 1)·σ(mlp_out)]·[1 + η·σ(tail_input)]`, always strictly
/// inside `(1, w_max·(1 + η))`.
pub fn adaptive_weight<F: Scalar>(mlp_out: F, tail_input: F, w_max: F, eta: F) -> F {
    let one = F::one();
    // with w_max close to 1 the sigmoid margin alone can round away
    let head = (one + (w_max - one) * open_sigmoid(mlp_out)).max(one + F::epsilon());
    let w = head * (one + eta * open_sigmoid(tail_input));
    w.min(w_max * (one + eta) * (one - F::epsilon()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceHyper {
    pub w_max: f64,
    pub eta: f64,
    pub tau: f64,
    pub features: SignalMask,
    pub raw_tail_score: bool,
}

impl Default for GuidanceHyper {
    fn default() -> Self {
        GuidanceHyper { w_max: 3.0, eta: 0.6, tau: 2.5, features: SignalMask::default(), raw_tail_score: false }
    }
}

/// Adaptive autoguidance network: an MLP over `u = [z₁ ; z₀ ; d₁ ; d₂ ; d₃]`
/// producing the raw scalar fed to the weight formula.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceNet<F> {
    pub net: DenseNet<F>,
    pub w_max: F,
    pub eta: F,
    pub tau: F,
    pub eps: F,
    pub features: SignalMask,
    pub raw_tail_score: bool,
    /// Running tail-score statistics used at inference.
    pub running_mean: F,
    pub running_std: F,
}

/// Everything recorded while computing one weight, for the backward pass.
#[derive(Debug, Clone)]
pub struct AanPass<F> {
    pub w: F,
    pub mlp_out: F,
    pub s_tail: F,
    pub tail_input: F,
    pub signals: GuidanceSignals<F>,
    /// Signal values as actually fed (zero where masked).
    pub fed: [F; 3],
    tail_scale: F,
    cache: ForwardCache<F>,
    sig: SignalsWithGrad<F>,
}

pub const DEFAULT_AAN_HIDDEN: [usize; 2] = [256, 64];
const RUNNING_MOMENTUM: f64 = 0.1;

impl<F: Scalar> GuidanceNet<F> {
    /// Silu hidden layers, identity scalar output.
    pub fn new(n_items: usize, hidden: &[usize], hyper: &GuidanceHyper, rng: &mut SeededRng) -> Result<Self> {
        let mut dims = vec![2 * n_items + 3];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let net = DenseNet::init(&dims, Activation::Silu, Activation::Identity, rng)?;
        Self::from_net(net, hyper)
    }

    pub fn from_net(net: DenseNet<F>, hyper: &GuidanceHyper) -> Result<Self> {
        if !(hyper.w_max > 1.0) {
            return Err(Error::hyper("w_max", format!("must exceed 1, got {}", hyper.w_max)));
        }
        if !(hyper.eta >= 0.0) {
            return Err(Error::hyper("eta", format!("must be non-negative, got {}", hyper.eta)));
        }
        if !(hyper.tau > 0.0) {
            return Err(Error::hyper("tau", format!("must be positive, got {}", hyper.tau)));
        }
        if net.out_dim() != 1 || net.in_dim() < 5 || (net.in_dim() - 3) % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "guidance network must map 2|I|+3 inputs to 1 output, got {} → {}",
                net.in_dim(),
                net.out_dim()
            )));
        }
        Ok(GuidanceNet {
            net,
            w_max: F::lit(hyper.w_max),
            eta: F::lit(hyper.eta),
            tau: F::lit(hyper.tau),
            eps: F::lit(RATIO_EPS),
            features: hyper.features,
            raw_tail_score: hyper.raw_tail_score,
            running_mean: F::zero(),
            running_std: F::one(),
        })
    }

    pub fn n_items(&self) -> usize {
        (self.net.in_dim() - 3) / 2
    }

    /// Upper end of the open weight range, `w_max·(1 + η)`.
    pub fn weight_bound(&self) -> F {
        self.w_max * (F::one() + self.eta)
    }

    pub fn inference_scaling(&self) -> TailScaling<F> {
        if self.raw_tail_score {
            TailScaling::Raw
        } else {
            TailScaling::Standardized { mean: self.running_mean, std: self.running_std }
        }
    }

    pub fn update_running(&mut self, batch: &TailScaling<F>) {
        if let TailScaling::Standardized { mean, std } = *batch {
            let m = F::lit(RUNNING_MOMENTUM);
            self.running_mean = (F::one() - m) * self.running_mean + m * mean;
            self.running_std = (F::one() - m) * self.running_std + m * std;
        }
    }

    fn fed_signals(&self, s: &GuidanceSignals<F>) -> [F; 3] {
        let pick = |on: bool, v: F| if on { v } else { F::zero() };
        [pick(self.features.d1, s.d1), pick(self.features.d2, s.d2), pick(self.features.d3, s.d3)]
    }

    /// The network input `u`.
    pub fn input(&self, z1: &[F], z0: &[F], s: &GuidanceSignals<F>) -> Vec<F> {
        let mut u = Vec::with_capacity(z1.len() * 2 + 3);
        u.extend_from_slice(z1);
        u.extend_from_slice(z0);
        u.extend(self.fed_signals(s));
        u
    }

    pub fn forward(&self, z1: &[F], z0: &[F], tail: &[bool], scaling: &TailScaling<F>) -> Result<AanPass<F>> {
        let sig = signals_with_grad(z1, z0, self.tau, self.eps)?;
        let s_tail = tail_score(z1, tail)?;
        let (tail_input, tail_scale) = scaling.apply(s_tail);
        let (out, cache) = self.net.forward(&self.input(z1, z0, &sig.signals))?;
        let mlp_out = out[0];
        let w = adaptive_weight(mlp_out, tail_input, self.w_max, self.eta);
        Ok(AanPass {
            w,
            mlp_out,
            s_tail,
            tail_input,
            signals: sig.signals,
            fed: self.fed_signals(&sig.signals),
            tail_scale,
            cache,
            sig,
        })
    }

    /// Propagates `dL/dw` into the network parameters (accumulated into
    /// `grads`) and returns the resulting `dL/dz₁`.
    pub fn backward(&self, pass: &AanPass<F>, grad_w: F, tail: &[bool], grads: &mut NetGrads<F>) -> Result<Vec<F>> {
        let one = F::one();
        let head = one + (self.w_max - one) * open_sigmoid(pass.mlp_out);
        let bonus = one + self.eta * open_sigmoid(pass.tail_input);
        let dw_dm = (self.w_max - one) * open_sigmoid_grad(pass.mlp_out) * bonus;
        let dw_dtail = head * self.eta * open_sigmoid_grad(pass.tail_input) * pass.tail_scale;

        let grad_u = self.net.backward_accumulate(&pass.cache, &[grad_w * dw_dm], grads)?;
        let n = z_len(&grad_u);
        let mut gz1 = grad_u[..n].to_vec();
        let feats = [
            (self.features.d1, grad_u[2 * n], &pass.sig.grad_d1),
            (self.features.d2, grad_u[2 * n + 1], &pass.sig.grad_d2),
            (self.features.d3, grad_u[2 * n + 2], &pass.sig.grad_d3),
        ];
        for (on, g_feat, g_sig) in feats {
            if on && !g_feat.is_zero() {
                for (acc, &d) in gz1.iter_mut().zip(g_sig.iter()) {
                    *acc += g_feat * d;
                }
            }
        }
        let g_tail = grad_w * dw_dtail;
        for (acc, &t) in gz1.iter_mut().zip(tail) {
            if t {
                *acc += g_tail;
            }
        }
        Ok(gz1)
    }
}

fn z_len<F>(grad_u: &[F]) -> usize {
    (grad_u.len() - 3) / 2
}

/// Weight from precomputed signals and tail score, using `net`'s MLP.
pub fn aan_weight<F: Scalar>(
    net: &GuidanceNet<F>,
    z1: &[F],
    z0: &[F],
    signals: &GuidanceSignals<F>,
    s_tail: F,
    scaling: &TailScaling<F>,
) -> Result<F> {
    let out = net.net.predict(&net.input(z1, z0, signals))?;
    let (tail_input, _) = scaling.apply(s_tail);
    Ok(adaptive_weight(out[0], tail_input, net.w_max, net.eta))
}
