use std::fmt;

use rand::Rng;

use super::{Activation, NeuralError};

/// Shape and activation of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{} {:?}", self.inputs, self.outputs, self.activation)
    }
}

fn describe(specs: &[LayerSpec]) -> String {
    let parts: Vec<String> = specs.iter().map(LayerSpec::to_string).collect();
    format!("[{}]", parts.join(", "))
}

/// Dense layer `a = f(W x + b)` with `W` stored row-major, `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
            activation,
        }
    }

    pub fn spec(&self) -> LayerSpec {
        LayerSpec {
            inputs: self.inputs,
            outputs: self.outputs,
            activation: self.activation,
        }
    }

    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.inputs + inp]
    }

    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.weights.chunks_exact(self.inputs).zip(&self.biases).map(|(row, b)| {
            self.activation.apply(b + dot(row, x))
        }));
    }
}

/// Dot product with four independent accumulators; the summation order is
/// fixed, so results are reproducible bit for bit.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Per-layer activations recorded by [`Network::trace`]; `activations[0]` is
/// the input and the last entry is the network output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Partial derivatives with the same layout as a [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradients {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.biases.iter_mut()).for_each(|g| *g *= factor);
        }
    }

    pub fn fill_zero(&mut self) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.biases.iter_mut()).for_each(|g| *g = 0.0);
        }
    }

    /// Every partial, layer by layer, weights before biases.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied())
    }

    /// First non-finite entry as `(layer, index)`, indexing weights then biases.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.layers.iter().enumerate().find_map(|(li, l)| {
            l.weights.iter().chain(&l.biases).position(|g| !g.is_finite()).map(|i| (li, i))
        })
    }

    pub(crate) fn congruent_with(&self, net: &Network) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.biases.len() == l.biases.len())
    }
}

/// A feed-forward stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    /// Checks that consecutive dimensions chain and every parameter is finite.
    pub fn new(layers: Vec<Layer>) -> Result<Self, NeuralError> {
        if layers.is_empty() {
            return Err(NeuralError::Corrupt("network has no layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.inputs == 0 || l.outputs == 0 {
                return Err(NeuralError::Corrupt(format!("layer {i} has a zero dimension")));
            }
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(NeuralError::Corrupt(format!("layer {i} parameter count does not match its shape")));
            }
            if let Some(prev) = i.checked_sub(1).map(|p| &layers[p]) {
                if prev.outputs != l.inputs {
                    return Err(NeuralError::Corrupt(format!(
                        "layer {i} expects {} inputs but layer {} produces {}",
                        l.inputs,
                        i - 1,
                        prev.outputs
                    )));
                }
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(NeuralError::Corrupt(format!("layer {i} holds a non-finite parameter")));
            }
        }
        Ok(Self { layers })
    }

    /// Random initialisation: weights uniform in `±1/sqrt(fan_in)`, biases zero.
    ///
    /// `sizes` lists every layer width including the input, so it is one
    /// longer than `activations`.
    ///
    /// # Panics
    ///
    /// If the lengths disagree or any size is zero.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], activations: &[Activation], rng: &mut R) -> Self {
        assert_eq!(sizes.len(), activations.len() + 1, "one activation per layer");
        assert!(sizes.iter().all(|&s| s > 0), "layer sizes must be positive");
        let layers = sizes
            .windows(2)
            .zip(activations)
            .map(|(w, &activation)| {
                let bound = 1.0 / (w[0] as f64).sqrt();
                let mut layer = Layer::zeros(w[0], w[1], activation);
                layer.weights.iter_mut().for_each(|v| *v = rng.random_range(-bound..=bound));
                layer
            })
            .collect();
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn architecture(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Layer::spec).collect()
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_len(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Errors unless `self` has exactly the given layer shapes and activations.
    pub fn expect_architecture(&self, expected: &[LayerSpec]) -> Result<(), NeuralError> {
        let found = self.architecture();
        if found == expected {
            Ok(())
        } else {
            Err(NeuralError::ShapeMismatch {
                expected: describe(expected),
                found: describe(&found),
            })
        }
    }

    fn check_congruent(&self, other: &Network) -> Result<(), NeuralError> {
        self.expect_architecture(&other.architecture())
    }

    /// # Panics
    ///
    /// If `input.len()` differs from the first layer's input width.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_len(), "network input length");
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Forward pass that keeps every layer's activations for a later
    /// [`Network::backward_trace`].
    ///
    /// # Panics
    ///
    /// If `input.len()` differs from the first layer's input width.
    pub fn trace(&self, input: &[f64]) -> Trace {
        assert_eq!(input.len(), self.input_len(), "network input length");
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        for layer in &self.layers {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.forward_into(&activations[activations.len() - 1], &mut out);
            activations.push(out);
        }
        Trace { activations }
    }

    /// Parameter gradients of `output_grad · net(input)`.
    ///
    /// # Panics
    ///
    /// On input or output-gradient length mismatch.
    pub fn backward(&self, input: &[f64], output_grad: &[f64]) -> Gradients {
        let mut grads = Gradients::zeros_like(self);
        self.backward_trace(&self.trace(input), output_grad, &mut grads);
        grads
    }

    /// Accumulates the parameter gradients of `output_grad · net(input)` into
    /// `grads` and returns the gradient with respect to the input.
    ///
    /// # Panics
    ///
    /// If `trace` was not produced by this network's shape, if
    /// `output_grad.len()` differs from the output width, or if `grads` is not
    /// shape-congruent.
    pub fn backward_trace(&self, trace: &Trace, output_grad: &[f64], grads: &mut Gradients) -> Vec<f64> {
        assert_eq!(trace.activations.len(), self.layers.len() + 1, "trace depth");
        assert_eq!(output_grad.len(), self.output_len(), "output gradient length");
        assert!(grads.congruent_with(self), "gradient buffer shape");

        let mut delta_out = output_grad.to_vec();
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let x = &trace.activations[li];
            let a = &trace.activations[li + 1];
            // dL/dz from dL/da.
            let delta: Vec<f64> = delta_out
                .iter()
                .zip(a)
                .map(|(d, &ai)| d * layer.activation.derivative_from_output(ai))
                .collect();
            let g = &mut grads.layers[li];
            let mut delta_in = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.biases[o] += d;
                let row = o * layer.inputs..(o + 1) * layer.inputs;
                axpy(d, x, &mut g.weights[row.clone()]);
                axpy(d, &layer.weights[row], &mut delta_in);
            }
            delta_out = delta_in;
        }
        delta_out
    }

    /// Copies `online` into `self` exactly.
    pub fn hard_sync(&mut self, online: &Network) -> Result<(), NeuralError> {
        self.check_congruent(online)?;
        self.clone_from(online);
        Ok(())
    }

    /// `self = tau * online + (1 - tau) * self`, element-wise.
    pub fn soft_sync(&mut self, online: &Network, tau: f64) -> Result<(), NeuralError> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(NeuralError::InvalidTau(tau));
        }
        self.check_congruent(online)?;
        for (t, o) in self.layers.iter_mut().zip(&online.layers) {
            let pairs = t.weights.iter_mut().zip(&o.weights).chain(t.biases.iter_mut().zip(&o.biases));
            for (tv, &ov) in pairs {
                *tv = tau * ov + (1.0 - tau) * *tv;
            }
        }
        Ok(())
    }

    /// Every parameter, layer by layer, weights before biases.
    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied())
    }

    /// Mutable view of every parameter in [`Network::params`] order; shapes stay fixed.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }
}
