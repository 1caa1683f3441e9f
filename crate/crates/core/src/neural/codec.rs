//! Binary network format, little-endian throughout:
//!
//! ```text
//! magic    4 bytes  "CRLN"
//! version  u32
//! layers   u32
//! per layer: inputs u32, outputs u32, activation tag u8
//! per layer: weights (row-major, outputs × inputs) then biases, each f64
//! ```

use super::{Activation, Layer, Network, NeuralError};

pub const MAGIC: [u8; 4] = *b"CRLN";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode_network(net: &Network) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 9 * net.layers().len() + 8 * net.param_count());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
    for l in net.layers() {
        out.extend_from_slice(&(l.inputs as u32).to_le_bytes());
        out.extend_from_slice(&(l.outputs as u32).to_le_bytes());
        out.push(l.activation.tag());
    }
    for p in net.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NeuralError> {
        let available = self.bytes.len() - self.offset;
        if available < n {
            return Err(NeuralError::Truncated {
                offset: self.offset,
                needed: n,
                available,
            });
        }
        let slice = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, NeuralError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f64(&mut self) -> Result<f64, NeuralError> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(f64::from_le_bytes(a))
    }
}

/// Parses a whole stream produced by [`encode_network`]. Trailing bytes are
/// treated as corruption.
pub fn decode_network(bytes: &[u8]) -> Result<Network, NeuralError> {
    let mut r = Reader { bytes, offset: 0 };
    if r.take(4)? != MAGIC {
        return Err(NeuralError::BadMagic);
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(NeuralError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let count = r.u32()? as usize;
    if count == 0 {
        return Err(NeuralError::Corrupt("network has no layers".into()));
    }
    let mut shapes = Vec::new();
    let mut total = 0usize;
    for i in 0..count {
        let inputs = r.u32()? as usize;
        let outputs = r.u32()? as usize;
        let tag = r.take(1)?[0];
        let activation =
            Activation::from_tag(tag).ok_or_else(|| NeuralError::Corrupt(format!("layer {i}: unknown activation tag {tag}")))?;
        total = inputs
            .checked_mul(outputs)
            .and_then(|w| w.checked_add(outputs))
            .and_then(|n| total.checked_add(n))
            .ok_or_else(|| NeuralError::Corrupt(format!("layer {i}: shape overflows")))?;
        shapes.push((inputs, outputs, activation));
    }
    // Check the parameter block length before allocating anything.
    let needed = total
        .checked_mul(8)
        .ok_or_else(|| NeuralError::Corrupt("parameter count overflows".into()))?;
    let available = bytes.len() - r.offset;
    if available < needed {
        return Err(NeuralError::Truncated {
            offset: r.offset,
            needed,
            available,
        });
    }
    let mut layers = Vec::with_capacity(count);
    for (inputs, outputs, activation) in shapes {
        let mut layer = Layer::zeros(inputs, outputs, activation);
        for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
            *w = r.f64()?;
        }
        layers.push(layer);
    }
    if r.offset != bytes.len() {
        return Err(NeuralError::Corrupt(format!("{} trailing bytes", bytes.len() - r.offset)));
    }
    Network::new(layers)
}
