//! Binary checkpoint format.
//!
//! ```text
//! "QIRN" | u32 version | u32 header_len | header (canonical JSON)
//!        | u64 count | count × f64 | u32 CRC32 of everything before it
//! ```
//!
//! All integers and floats are little-endian. The payload holds the
//! trainable parameters, then the buffers, then (if present) the optimizer's
//! learning rates, first and second moments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::build::{build_model, Model};
use super::config::ModelConfig;
use crate::error::{Error, Result};
use crate::nn::{AdamState, Section};

pub const MAGIC: &[u8; 4] = b"QIRN";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs: usize,
    pub final_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct OptimizerHeader {
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: ModelConfig,
    sections: Vec<Section>,
    meta: Option<TrainingMeta>,
    optimizer: Option<OptimizerHeader>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub optimizer: Option<AdamState>,
    pub meta: Option<TrainingMeta>,
}

impl Checkpoint {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            optimizer: None,
            meta: None,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let stack = &self.model.stack;
        let header = Header {
            config: self.model.config.clone(),
            sections: stack.sections(),
            meta: self.meta.clone(),
            optimizer: self.optimizer.as_ref().map(|o| OptimizerHeader {
                beta1: o.beta1,
                beta2: o.beta2,
                eps: o.eps,
                step: o.step,
            }),
        };
        let json = serde_json::to_vec(&header)?;
        let mut payload = stack.params();
        payload.extend(stack.buffers());
        if let Some(o) = &self.optimizer {
            if o.len() != stack.num_params() {
                return Err(Error::Checkpoint(format!(
                    "optimizer tracks {} parameters, model has {}",
                    o.len(),
                    stack.num_params()
                )));
            }
            payload.extend(&o.lr);
            payload.extend(&o.m);
            payload.extend(&o.v);
        }

        let mut out = Vec::with_capacity(24 + json.len() + 8 * payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        for v in payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    /// Parses and validates a checkpoint; nothing is returned unless the
    /// checksum, version and every section length agree.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Checkpoint(msg.to_string());
        if bytes.len() < 4 + 4 + 4 + 8 + 4 {
            return Err(bad("file too short"));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic bytes"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != stored {
            return Err(bad("checksum mismatch"));
        }
        let mut cur = Cursor { buf: body, pos: 4 };
        let version = cur.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let header_len = cur.u32()? as usize;
        let header: Header = serde_json::from_slice(cur.take(header_len)?)
            .map_err(|e| Error::Checkpoint(format!("malformed header: {e}")))?;
        let count = cur.u64()? as usize;
        let raw = cur.take(count.checked_mul(8).ok_or_else(|| bad("payload size overflow"))?)?;
        if cur.pos != body.len() {
            return Err(bad("trailing bytes after payload"));
        }
        let payload: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();

        let mut model = build_model(&header.config)?;
        if model.stack.sections() != header.sections {
            return Err(bad("section layout does not match the configured architecture"));
        }
        let np = model.stack.num_params();
        let nb = model.stack.num_buffers();
        let expected = np + nb + if header.optimizer.is_some() { 3 * np } else { 0 };
        if payload.len() != expected {
            return Err(Error::Checkpoint(format!(
                "payload holds {} values, expected {expected}",
                payload.len()
            )));
        }
        model.stack.set_params(&payload[..np])?;
        model.stack.set_buffers(&payload[np..np + nb])?;
        let optimizer = header.optimizer.map(|h| {
            let rest = &payload[np + nb..];
            AdamState {
                lr: rest[..np].to_vec(),
                m: rest[np..2 * np].to_vec(),
                v: rest[2 * np..].to_vec(),
                beta1: h.beta1,
                beta2: h.beta2,
                eps: h.eps,
                step: h.step,
            }
        });
        Ok(Self {
            model,
            optimizer,
            meta: header.meta,
        })
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Checkpoint("truncated file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, checkpoint.to_bytes()?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Family;
    use crate::nn::column;

    fn trained_ish(family: Family) -> Model {
        let mut cfg = ModelConfig::new(family, 1, 1).seed(3);
        cfg.hidden_dim = 3;
        cfg.qubits = 3;
        cfg.depth = 2;
        cfg.reuploads = 2;
        cfg.blocks = 1;
        let mut m = build_model(&cfg).unwrap();
        let x = column(&[-0.5, 0.0, 0.25, 0.9]);
        m.stack.forward_train(&x).unwrap();
        m
    }

    #[test]
    fn round_trip_reproduces_outputs_exactly() {
        let probe = column(&[-1.0, -0.3, 0.2, 0.77]);
        for family in Family::ALL {
            let model = trained_ish(family);
            let mut ck = Checkpoint::new(model.clone());
            ck.meta = Some(TrainingMeta { epochs: 4, final_loss: 0.125 });
            let mut opt = AdamState::uniform(model.num_params(), 1e-3);
            opt.m[0] = 0.5;
            opt.step = 7;
            ck.optimizer = Some(opt);
            let back = Checkpoint::from_bytes(&ck.to_bytes().unwrap()).unwrap();
            assert_eq!(back, ck, "{family}");
            assert_eq!(
                back.model.predict(&probe).unwrap(),
                model.predict(&probe).unwrap()
            );
        }
    }

    #[test]
    fn corruption_and_truncation_are_detected() {
        let bytes = Checkpoint::new(trained_ish(Family::Qiren)).to_bytes().unwrap();
        let mut flipped = bytes.clone();
        flipped[bytes.len() / 2] ^= 0x10;
        assert!(matches!(Checkpoint::from_bytes(&flipped), Err(Error::Checkpoint(m)) if m.contains("checksum")));
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 9]).is_err());
        assert!(Checkpoint::from_bytes(&bytes[..10]).is_err());
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let mut bytes = Checkpoint::new(trained_ish(Family::Relu)).to_bytes().unwrap();
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        let n = bytes.len() - 4;
        let crc = crc32fast::hash(&bytes[..n]);
        bytes[n..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(Error::Checkpoint(m)) if m.contains("version")));
    }
}
