use serde::{Deserialize, Serialize};

use super::{Gradients, Network, NeuralError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(format!("learning rate must be non-negative, got {}", self.learning_rate));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err("moment decay rates must lie in [0, 1)".into());
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err("epsilon must be positive".into());
        }
        Ok(())
    }
}

/// Adaptive-moment optimizer with bias-corrected first and second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    first: Gradients,
    second: Gradients,
}

impl Adam {
    pub fn new(net: &Network, config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            first: Gradients::zeros_like(net),
            second: Gradients::zeros_like(net),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One descent step on `net` along `grads`. Non-finite gradients are
    /// rejected before anything changes.
    pub fn update(&mut self, net: &mut Network, grads: &Gradients) -> Result<(), NeuralError> {
        if !grads.congruent_with(net) || !self.first.congruent_with(net) {
            return Err(NeuralError::ShapeMismatch {
                expected: format!("{} parameters", net.param_count()),
                found: format!("{} gradients", grads.iter().count()),
            });
        }
        if let Some((layer, index)) = grads.first_non_finite() {
            return Err(NeuralError::NonFiniteGradient { layer, index });
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let correct1 = 1.0 - beta1.powi(t);
        let correct2 = 1.0 - beta2.powi(t);

        let moments = self.first.layers.iter_mut().zip(self.second.layers.iter_mut());
        let params = net.layers_mut().iter_mut();
        for (((m, v), g), layer) in moments.zip(&grads.layers).zip(params) {
            let m_all = m.weights.iter_mut().chain(m.biases.iter_mut());
            let v_all = v.weights.iter_mut().chain(v.biases.iter_mut());
            let g_all = g.weights.iter().chain(&g.biases);
            let p_all = layer.weights.iter_mut().chain(layer.biases.iter_mut());
            for (((mi, vi), &gi), pi) in m_all.zip(v_all).zip(g_all).zip(p_all) {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / correct1;
                let v_hat = *vi / correct2;
                *pi -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}
