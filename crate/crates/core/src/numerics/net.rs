use super::activation::Activation;
use super::rng::SeededRng;
use super::scalar::{cast_vec, Scalar};
use crate::error::{Error, Result};

/// One fully connected layer: `a = act(W x + b)` with `W` stored row-major
/// as `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<F> {
    pub(crate) weight: Vec<F>,
    pub(crate) bias: Vec<F>,
    pub(crate) in_dim: usize,
    pub(crate) out_dim: usize,
    pub(crate) activation: Activation,
}

impl<F: Scalar> Layer<F> {
    pub fn new(weight: Vec<F>, bias: Vec<F>, in_dim: usize, activation: Activation) -> Result<Self> {
        let out_dim = bias.len();
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidInput("layer dimensions must be positive".into()));
        }
        if weight.len() != in_dim * out_dim {
            return Err(Error::InvalidInput(format!(
                "weight has {} entries, expected {out_dim}×{in_dim}",
                weight.len()
            )));
        }
        if weight.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("layer parameters must be finite".into()));
        }
        Ok(Layer { weight, bias, in_dim, out_dim, activation })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut SeededRng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weight = (0..in_dim * out_dim).map(|_| F::lit(rng.uniform_range(-limit, limit))).collect();
        Layer { weight, bias: vec![F::zero(); out_dim], in_dim, out_dim, activation }
    }

    pub fn weight(&self) -> &[F] {
        &self.weight
    }

    pub fn bias(&self) -> &[F] {
        &self.bias
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn affine(&self, x: &[F], z: &mut [F]) {
        for (o, zo) in z.iter_mut().enumerate() {
            let row = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.bias[o];
            for (&w, &xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            *zo = acc;
        }
    }
}

/// Multilayer perceptron with per-layer activations.
#[derive(Debug, Clone)]
pub struct DenseNet<F> {
    layers: Vec<Layer<F>>,
    // bumped on every parameter mutation so stale caches can be detected
    generation: u64,
}

impl<F: PartialEq> PartialEq for DenseNet<F> {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

/// Activations recorded by [`DenseNet::forward`], consumed by
/// [`DenseNet::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache<F> {
    /// Input of every layer; `inputs[0]` is the network input.
    inputs: Vec<Vec<F>>,
    pre: Vec<Vec<F>>,
    post: Vec<Vec<F>>,
    generation: u64,
    dims: Vec<(usize, usize)>,
}

impl<F> ForwardCache<F> {
    pub fn input(&self) -> &[F] {
        &self.inputs[0]
    }

    pub fn output(&self) -> &[F] {
        self.post.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Gradients with the same layout as a [`DenseNet`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrads<F> {
    pub weight: Vec<Vec<F>>,
    pub bias: Vec<Vec<F>>,
}

impl<F: Scalar> NetGrads<F> {
    pub fn zeros_like(net: &DenseNet<F>) -> Self {
        NetGrads {
            weight: net.layers.iter().map(|l| vec![F::zero(); l.weight.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![F::zero(); l.bias.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &NetGrads<F>) {
        for (a, b) in self.weight.iter_mut().zip(&other.weight).chain(self.bias.iter_mut().zip(&other.bias)) {
            for (x, &y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: F) {
        for block in self.weight.iter_mut().chain(self.bias.iter_mut()) {
            for x in block.iter_mut() {
                *x *= factor;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.weight.iter().chain(&self.bias).all(|b| b.iter().all(|v| v.is_zero()))
    }

    /// First layer index holding a non-finite entry, if any.
    pub fn first_non_finite_layer(&self) -> Option<usize> {
        (0..self.weight.len())
            .find(|&i| self.weight[i].iter().chain(&self.bias[i]).any(|v| !v.is_finite()))
    }

    /// Flattened blocks in the order `[W0, b0, W1, b1, ...]`.
    pub fn blocks(&self) -> Vec<Vec<F>> {
        self.weight.iter().zip(&self.bias).flat_map(|(w, b)| [w.clone(), b.clone()]).collect()
    }
}

impl<F: Scalar> DenseNet<F> {
    pub fn new(layers: Vec<Layer<F>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput("network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::InvalidInput(format!(
                    "layer {i} outputs {} values but layer {} expects {}",
                    pair[0].out_dim,
                    i + 1,
                    pair[1].in_dim
                )));
            }
        }
        Ok(DenseNet { layers, generation: 0 })
    }

    /// Randomly initialised MLP through `dims` (input, hidden..., output).
    pub fn init(dims: &[usize], hidden: Activation, output: Activation, rng: &mut SeededRng) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidInput(format!("bad layer widths {dims:?}")));
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                Layer::glorot(dims[i], dims[i + 1], act, rng)
            })
            .collect();
        DenseNet::new(layers)
    }

    pub fn layers(&self) -> &[Layer<F>] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    fn dims(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect()
    }

    pub fn cast<G: Scalar>(&self) -> DenseNet<G> {
        DenseNet {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weight: cast_vec(&l.weight),
                    bias: cast_vec(&l.bias),
                    in_dim: l.in_dim,
                    out_dim: l.out_dim,
                    activation: l.activation,
                })
                .collect(),
            generation: 0,
        }
    }

    fn check_input(&self, x: &[F]) -> Result<()> {
        if x.len() != self.in_dim() {
            return Err(Error::InvalidInput(format!(
                "network expects {} inputs, got {}",
                self.in_dim(),
                x.len()
            )));
        }
        Ok(())
    }

    /// Forward pass without recording activations.
    pub fn predict(&self, x: &[F]) -> Result<Vec<F>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        for layer in &self.layers {
            let mut z = vec![F::zero(); layer.out_dim];
            layer.affine(&cur, &mut z);
            for v in z.iter_mut() {
                *v = layer.activation.apply(*v);
            }
            cur = z;
        }
        Ok(cur)
    }

    pub fn forward(&self, x: &[F]) -> Result<(Vec<F>, ForwardCache<F>)> {
        self.check_input(x)?;
        let n = self.layers.len();
        let mut inputs = Vec::with_capacity(n);
        let mut pre = Vec::with_capacity(n);
        let mut post: Vec<Vec<F>> = Vec::with_capacity(n);
        inputs.push(x.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = vec![F::zero(); layer.out_dim];
            layer.affine(&inputs[i], &mut z);
            let a: Vec<F> = z.iter().map(|&v| layer.activation.apply(v)).collect();
            if i + 1 < n {
                inputs.push(a.clone());
            }
            pre.push(z);
            post.push(a);
        }
        let y = post[n - 1].clone();
        Ok((y, ForwardCache { inputs, pre, post, generation: self.generation, dims: self.dims() }))
    }

    pub fn backward(&self, cache: &ForwardCache<F>, grad_y: &[F]) -> Result<(NetGrads<F>, Vec<F>)> {
        let mut grads = NetGrads::zeros_like(self);
        let gx = self.backward_accumulate(cache, grad_y, &mut grads)?;
        Ok((grads, gx))
    }

    /// Backward pass adding parameter gradients into `grads`; returns the
    /// gradient with respect to the network input.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache<F>,
        grad_y: &[F],
        grads: &mut NetGrads<F>,
    ) -> Result<Vec<F>> {
        if cache.generation != self.generation || cache.dims != self.dims() {
            return Err(Error::InvalidInput("forward cache does not belong to this network state".into()));
        }
        if grad_y.len() != self.out_dim() {
            return Err(Error::InvalidInput(format!(
                "output gradient has {} entries, network outputs {}",
                grad_y.len(),
                self.out_dim()
            )));
        }
        let mut upstream = grad_y.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let delta: Vec<F> = upstream
                .iter()
                .zip(cache.pre[i].iter().zip(&cache.post[i]))
                .map(|(&g, (&z, &a))| g * layer.activation.derivative(z, a))
                .collect();
            let input = &cache.inputs[i];
            let gw = &mut grads.weight[i];
            let gb = &mut grads.bias[i];
            let mut gx = vec![F::zero(); layer.in_dim];
            for (o, &d) in delta.iter().enumerate() {
                gb[o] += d;
                if d.is_zero() {
                    continue;
                }
                let row = &layer.weight[o * layer.in_dim..(o + 1) * layer.in_dim];
                let grow = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                for j in 0..layer.in_dim {
                    grow[j] += d * input[j];
                    gx[j] += row[j] * d;
                }
            }
            upstream = gx;
        }
        Ok(upstream)
    }

    /// Flattened parameter blocks in the order `[W0, b0, W1, b1, ...]`.
    pub fn param_blocks(&self) -> Vec<Vec<F>> {
        self.layers.iter().flat_map(|l| [l.weight.clone(), l.bias.clone()]).collect()
    }

    pub fn block_names(&self, prefix: &str) -> Vec<String> {
        (0..self.layers.len())
            .flat_map(|i| [format!("{prefix}.{i}.weight"), format!("{prefix}.{i}.bias")])
            .collect()
    }

    pub fn set_param_blocks(&mut self, blocks: &[Vec<F>]) -> Result<()> {
        if blocks.len() != 2 * self.layers.len() {
            return Err(Error::InvalidInput("wrong number of parameter blocks".into()));
        }
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let (w, b) = (&blocks[2 * i], &blocks[2 * i + 1]);
            if w.len() != layer.weight.len() || b.len() != layer.bias.len() {
                return Err(Error::InvalidInput(format!("parameter block {i} has the wrong size")));
            }
            layer.weight.copy_from_slice(w);
            layer.bias.copy_from_slice(b);
        }
        self.generation += 1;
        Ok(())
    }

    /// Mutable access to the layers; invalidates outstanding forward caches.
    pub fn layers_mut(&mut self) -> &mut [Layer<F>] {
        self.generation += 1;
        &mut self.layers
    }

    /// Order-sensitive FNV-1a digest of every parameter bit pattern.
    pub fn param_digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for l in &self.layers {
            for v in l.weight.iter().chain(&l.bias) {
                for byte in v.to_bits_u64().to_le_bytes() {
                    h ^= byte as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        h
    }
}
