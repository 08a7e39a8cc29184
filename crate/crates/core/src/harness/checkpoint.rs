//! `EMIC` checkpoint files.
//!
//! ```text
//! "EMIC" | version u8 = 1 | model id u8 | epoch u32 LE
//! then for each parameter tensor, in layer order (weights, then biases):
//!   rank u8 | dims u32 LE × rank | values f32 LE × product(dims)
//! ```
//!
//! Optimiser moments are not stored. The training configuration is kept
//! next to the checkpoint in `<file>.config` as `key = value` lines.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::model::{build_model, ModelId};
use crate::nn::{LayerState, Network, TrainConfig};
use crate::tensor::Tensor;

pub const EMIC_MAGIC: &[u8; 4] = b"EMIC";
pub const EMIC_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model_id: ModelId,
    pub epoch: u32,
    /// Weights then biases of each conv/dense layer, in layer order.
    pub tensors: Vec<Tensor<f32>>,
    pub train_config: Option<TrainConfig>,
}

fn config_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".config");
    PathBuf::from(name)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::format("EMIC", format!("truncated at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

impl Checkpoint {
    pub fn from_network(model_id: ModelId, epoch: u32, net: &Network<f32>, config: Option<&TrainConfig>) -> Self {
        let tensors = net
            .param_states()
            .flat_map(|s| [s.weights.clone(), s.biases.clone()])
            .collect();
        Self {
            model_id,
            epoch,
            tensors,
            train_config: config.cloned(),
        }
    }

    /// Rebuilds the network for `model_id`, rejecting parameter shapes that
    /// do not match its architecture.
    pub fn to_network(&self) -> Result<Network<f32>> {
        let spec = build_model(self.model_id.get())?;
        let layers = spec.layer_shapes()?;
        let mut expected = Vec::new();
        let mut shape = spec.input_shape.to_vec();
        for (layer, out) in &layers {
            if let Some((w, b)) = layer.param_shapes(&shape)? {
                expected.push(w);
                expected.push(b);
            }
            shape = out.clone();
        }
        if expected.len() != self.tensors.len() {
            return Err(Error::format(
                "EMIC",
                format!(
                    "model {} has {} parameter tensors, checkpoint has {}",
                    self.model_id,
                    expected.len(),
                    self.tensors.len()
                ),
            ));
        }
        for (i, (want, got)) in expected.iter().zip(&self.tensors).enumerate() {
            if want.as_slice() != got.shape() {
                return Err(Error::format(
                    "EMIC",
                    format!(
                        "tensor {i} of model {} should be {want:?}, checkpoint has {:?}",
                        self.model_id,
                        got.shape()
                    ),
                ));
            }
        }
        let states = self
            .tensors
            .chunks_exact(2)
            .map(|pair| LayerState::new(pair[0].clone(), pair[1].clone()))
            .collect();
        Network::from_states(spec.layers, spec.input_shape.to_vec(), states)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(EMIC_MAGIC);
        out.push(EMIC_VERSION);
        out.push(self.model_id.get());
        out.extend_from_slice(&self.epoch.to_le_bytes());
        for t in &self.tensors {
            out.push(t.rank() as u8);
            for &d in t.shape() {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Parses a checkpoint body; the tensor count comes from the model id.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != EMIC_MAGIC {
            return Err(Error::format("EMIC", "bad magic"));
        }
        let version = r.u8()?;
        if version != EMIC_VERSION {
            return Err(Error::format("EMIC", format!("unsupported version {version}")));
        }
        let model_id = ModelId::new(r.u8()?).map_err(|e| Error::format("EMIC", e.to_string()))?;
        let epoch = r.u32()?;
        let mut tensors = Vec::new();
        while r.pos < bytes.len() {
            let rank = r.u8()? as usize;
            if rank == 0 {
                return Err(Error::format("EMIC", "zero-rank tensor"));
            }
            let shape = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| Error::format("EMIC", "tensor size overflows"))?;
            let raw = r.take(n.checked_mul(4).ok_or_else(|| Error::format("EMIC", "tensor size overflows"))?)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            tensors.push(Tensor::new(shape, data).map_err(|e| Error::format("EMIC", e.to_string()))?);
        }
        Ok(Self {
            model_id,
            epoch,
            tensors,
            train_config: None,
        })
    }

    /// Writes the binary checkpoint and, when present, its config sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(Error::at(path))?;
        if let Some(cfg) = &self.train_config {
            let sidecar = config_path(path);
            let text = RunConfig::train_config_text(cfg);
            fs::write(&sidecar, text).map_err(Error::at(&sidecar))?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(Error::at(path))?;
        let mut ckpt = Self::from_bytes(&bytes)?;
        let sidecar = config_path(path);
        if sidecar.exists() {
            let text = fs::read_to_string(&sidecar).map_err(Error::at(&sidecar))?;
            let mut run = RunConfig::default();
            run.apply_text(&text)?;
            ckpt.train_config = Some(run.train);
        }
        Ok(ckpt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_of_a_tiny_checkpoint() {
        let ckpt = Checkpoint {
            model_id: ModelId::new(4).unwrap(),
            epoch: 7,
            tensors: vec![Tensor::new(vec![1, 2], vec![1.0, -2.0]).unwrap()],
            train_config: None,
        };
        let bytes = ckpt.to_bytes();
        assert_eq!(&bytes[..4], b"EMIC");
        assert_eq!(bytes[4..6], [1, 4]);
        assert_eq!(bytes[6..10], 7u32.to_le_bytes());
        assert_eq!(bytes[10], 2);
        assert_eq!(bytes[11..15], 1u32.to_le_bytes());
        assert_eq!(bytes[15..19], 2u32.to_le_bytes());
        assert_eq!(bytes[19..23], 1.0f32.to_le_bytes());
        assert_eq!(bytes[23..27], (-2.0f32).to_le_bytes());
        assert_eq!(bytes.len(), 27);
        assert_eq!(Checkpoint::from_bytes(&bytes).unwrap(), ckpt);
    }

    #[test]
    fn model4_round_trip_is_bit_exact() {
        let net = build_model(4).unwrap().network::<f32>(11).unwrap();
        let ckpt = Checkpoint::from_network(ModelId::new(4).unwrap(), 3, &net, None);
        let bytes = ckpt.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        let rebuilt = back.to_network().unwrap();
        for (a, b) in rebuilt.param_states().zip(net.param_states()) {
            assert_eq!(a.weights, b.weights);
            assert_eq!(a.biases, b.biases);
        }
    }

    #[test]
    fn mismatched_model_is_diagnosed() {
        let net = build_model(4).unwrap().network::<f32>(1).unwrap();
        let mut ckpt = Checkpoint::from_network(ModelId::new(4).unwrap(), 0, &net, None);
        ckpt.model_id = ModelId::new(3).unwrap();
        let err = ckpt.to_network().unwrap_err().to_string();
        assert!(err.contains("model 3"), "{err}");
    }

    #[test]
    fn truncated_and_corrupt_files_rejected() {
        let net = build_model(4).unwrap().network::<f32>(1).unwrap();
        let bytes = Checkpoint::from_network(ModelId::new(4).unwrap(), 0, &net, None).to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[5] = 9;
        assert!(Checkpoint::from_bytes(&bad).is_err());
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad).is_err());
    }
}
