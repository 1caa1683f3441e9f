//! Small dense networks in double precision: forward pass, exact reverse-mode
//! gradients, an Adam optimizer, target-network syncing and a versioned
//! binary format.

mod codec;
mod network;
mod optimizer;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use codec::{decode_network, encode_network, FORMAT_VERSION, MAGIC};
pub use network::{Gradients, Layer, LayerGradients, LayerSpec, Network, Trace};
pub use optimizer::{Adam, AdamConfig};

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("soft update rate must lie in [0, 1], got {0}")]
    InvalidTau(f64),
    #[error("non-finite gradient in layer {layer} at parameter {index}")]
    NonFiniteGradient { layer: usize, index: usize },
    #[error("not a network stream (bad magic bytes)")]
    BadMagic,
    #[error("unsupported format version {found} (this build reads version {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("stream truncated: needed {needed} bytes at offset {offset}, {available} available")]
    Truncated { offset: usize, needed: usize, available: usize },
    #[error("corrupt network stream: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation's output `a = f(z)`.
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Linear => 1.0,
        }
    }

    /// Tag byte used in the binary format.
    pub fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Linear => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Activation> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Linear),
            _ => None,
        }
    }
}
