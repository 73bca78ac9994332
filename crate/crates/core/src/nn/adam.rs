use super::{Gradients, Mlp, NnError, Result};

/// Bias-corrected Adam with per-parameter moment buffers.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m: Gradients,
    v: Gradients,
}

impl AdamState {
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
        }
    }

    /// One update of `net` against `grads`. Non-finite gradients abort the
    /// update before any parameter changes.
    pub fn update(&mut self, net: &mut Mlp, grads: &Gradients) -> Result<()> {
        if grads.layers.len() != net.layers.len()
            || grads
                .layers
                .iter()
                .zip(&net.layers)
                .any(|(g, l)| g.weights.len() != l.weights.len() || g.bias.len() != l.bias.len())
        {
            return Err(NnError::BadArchitecture("gradient shape does not match network".into()));
        }
        for (k, g) in grads.layers.iter().enumerate() {
            if g.weights.iter().any(|v| !v.is_finite()) {
                return Err(NnError::NonFinite(format!("layer {k} weights")));
            }
            if g.bias.iter().any(|v| !v.is_finite()) {
                return Err(NnError::NonFinite(format!("layer {k} bias")));
            }
        }

        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step as i32);
        let c2 = 1.0 - b2.powi(self.step as i32);
        let lr = self.learning_rate;
        let eps = self.epsilon;
        let moments = self.m.layers.iter_mut().zip(self.v.layers.iter_mut());
        for ((layer, g), (m, v)) in net.layers.iter_mut().zip(&grads.layers).zip(moments) {
            let params = layer.weights.iter_mut().chain(layer.bias.iter_mut());
            let grads = g.weights.iter().chain(&g.bias);
            let ms = m.weights.iter_mut().chain(m.bias.iter_mut());
            let vs = v.weights.iter_mut().chain(v.bias.iter_mut());
            for (((p, g), m), v) in params.zip(grads).zip(ms).zip(vs) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            }
        }
        Ok(())
    }
}
