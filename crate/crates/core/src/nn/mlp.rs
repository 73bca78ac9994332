use super::{NnError, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Fully connected layer; `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn uniform<R: Rng + ?Sized>(inputs: usize, outputs: usize, bound: f64, rng: &mut R) -> Self {
        let weights = (0..inputs * outputs)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self {
            inputs,
            outputs,
            weights,
            bias: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.weights.chunks_exact(self.inputs).zip(&self.bias).map(|(row, b)| {
            b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
        }));
    }
}

/// Rectified-linear MLP with a linear output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Inputs to every layer, as seen during a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Vec<f64>>,
}

/// Parameter-shaped gradient (or moment) buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += y);
            a.bias.iter_mut().zip(&b.bias).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|x| *x *= k);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias))
    }
}

impl Mlp {
    /// Random network with layer widths `dims` (input first, output last).
    ///
    /// Hidden layers use He-uniform weights; the output layer uses
    /// Glorot-uniform scaled by `head_scale`. Biases start at zero.
    pub fn new<R: Rng + ?Sized>(dims: &[usize], head_scale: f64, rng: &mut R) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(NnError::BadArchitecture(format!("{dims:?}")));
        }
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (i, o) = (w[0], w[1]);
                let bound = if k == last {
                    head_scale * (6.0 / (i + o) as f64).sqrt()
                } else {
                    (6.0 / i as f64).sqrt()
                };
                Dense::uniform(i, o, bound, rng)
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(NnError::BadArchitecture("no layers".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(NnError::BadArchitecture(format!("layer {k} has inconsistent shapes")));
            }
            if k > 0 && layers[k - 1].outputs != l.inputs {
                return Err(NnError::BadArchitecture(format!(
                    "layer {k} expects {} inputs, previous layer gives {}",
                    l.inputs,
                    layers[k - 1].outputs
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].inputs];
        d.extend(self.layers.iter().map(|l| l.outputs));
        d
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map(|l| l.outputs).unwrap_or(0)
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_len() {
            return Err(NnError::DimensionMismatch {
                expected: self.input_len(),
                found: input.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        let mut y = Vec::new();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.affine(&x, &mut y);
            if k != last {
                y.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut x, &mut y);
        }
        Ok(x)
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_input(input)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut x = input.to_vec();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut y = Vec::with_capacity(layer.outputs);
            layer.affine(&x, &mut y);
            if k != last {
                y.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            inputs.push(std::mem::replace(&mut x, y));
        }
        Ok((x, ForwardCache { inputs }))
    }

    /// Accumulate `d(upstream . output)/d(params)` into `grads`.
    pub fn backward_into(&self, cache: &ForwardCache, upstream: &[f64], grads: &mut Gradients) -> Result<()> {
        if upstream.len() != self.output_len() {
            return Err(NnError::DimensionMismatch {
                expected: self.output_len(),
                found: upstream.len(),
            });
        }
        if cache.inputs.len() != self.layers.len() || grads.layers.len() != self.layers.len() {
            return Err(NnError::BadArchitecture("cache or gradient buffer shape".into()));
        }
        let mut delta = upstream.to_vec();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let x = &cache.inputs[k];
            let g = &mut grads.layers[k];
            for (o, d) in delta.iter().enumerate() {
                g.bias[o] += d;
                if *d != 0.0 {
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    row.iter_mut().zip(x).for_each(|(gw, xv)| *gw += d * xv);
                }
            }
            if k == 0 {
                break;
            }
            let mut prev = vec![0.0; layer.inputs];
            for (o, d) in delta.iter().enumerate() {
                if *d != 0.0 {
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    prev.iter_mut().zip(row).for_each(|(p, w)| *p += w * d);
                }
            }
            // x is the post-ReLU output of layer k-1; zero means the unit was off
            prev.iter_mut().zip(x).for_each(|(p, a)| {
                if *a <= 0.0 {
                    *p = 0.0
                }
            });
            delta = prev;
        }
        Ok(())
    }

    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<Gradients> {
        let mut g = Gradients::zeros_like(self);
        self.backward_into(cache, upstream, &mut g)?;
        Ok(g)
    }

    /// Flat view of every parameter, layer by layer, weights before bias.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias))
    }
}
