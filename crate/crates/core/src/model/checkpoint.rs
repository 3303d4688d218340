//! Binary model checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      b"CTXZ"
//! version    u8 (= 1)
//! dim        u32
//! rank       u32
//! steps      u32
//! recurrent  u8
//! default    u8   (0 ones, 1 learned, 2 random)
//! init_seed  u64
//! emb_seed   u64
//! emb_rows   u32  (0 when no embedding matrix is stored)
//! emb_dim    u32
//! n_params   u64
//! params     n_params × f64, canonical parameter order
//! embedding  emb_rows × emb_dim × f64
//! ```

use std::io::{Read, Write};

use super::{AttentionStep, ContextualizerModel, DefaultContext, ModelConfig};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"CTXZ";
pub const VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: ContextualizerModel,
    pub init_seed: u64,
    pub embedding_seed: u64,
    /// Present only when embeddings were trained.
    pub embeddings: Option<Tensor>,
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let cfg = self.model.config();
        let (er, ed) = self
            .embeddings
            .as_ref()
            .map_or((0, 0), |e| (e.rows() as u32, e.cols() as u32));
        let params = self.model.flat_parameters();

        let mut buf = Vec::with_capacity(64 + 8 * params.len());
        buf.extend_from_slice(MAGIC);
        buf.push(VERSION);
        for v in [cfg.dim, cfg.rank, cfg.steps] {
            buf.extend_from_slice(&u32::try_from(v).map_err(|_| Error::Input("dimension too large".into()))?.to_le_bytes());
        }
        buf.push(cfg.recurrent as u8);
        buf.push(cfg.default_context.tag());
        buf.extend_from_slice(&self.init_seed.to_le_bytes());
        buf.extend_from_slice(&self.embedding_seed.to_le_bytes());
        buf.extend_from_slice(&er.to_le_bytes());
        buf.extend_from_slice(&ed.to_le_bytes());
        buf.extend_from_slice(&(params.len() as u64).to_le_bytes());
        for p in &params {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        if let Some(e) = &self.embeddings {
            for x in e.data() {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        out.write_all(&buf)
            .map_err(|e| Error::Format(format!("writing checkpoint: {e}")))
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut bytes = Vec::new();
        input
            .read_to_end(&mut bytes)
            .map_err(|e| Error::Format(format!("reading checkpoint: {e}")))?;
        let mut r = Reader { bytes: &bytes, pos: 0 };

        if r.take(4)? != MAGIC {
            return Err(Error::Format("not a checkpoint (bad magic)".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let dim = r.u32()? as usize;
        let rank = r.u32()? as usize;
        let steps = r.u32()? as usize;
        let recurrent = r.u8()? != 0;
        let default_context = DefaultContext::from_tag(r.u8()?)
            .ok_or_else(|| Error::Format("unknown default-context tag".into()))?;
        let init_seed = r.u64()?;
        let embedding_seed = r.u64()?;
        let er = r.u32()? as usize;
        let ed = r.u32()? as usize;
        let n_params = r.u64()? as usize;

        let config = ModelConfig {
            dim,
            rank,
            steps,
            recurrent,
            default_context,
        };
        if n_params != config.parameter_count() {
            return Err(Error::Format(format!(
                "header promises {} parameters, stored {n_params}",
                config.parameter_count()
            )));
        }
        let flat = r.f64s(n_params)?;
        let embeddings = if er > 0 {
            Some(Tensor::matrix(er, ed, r.f64s(er * ed)?)?)
        } else {
            None
        };
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes after checkpoint".into()));
        }

        let triples = if recurrent { 1 } else { steps.max(1) };
        let placeholder = (0..triples)
            .map(|_| {
                AttentionStep::new(
                    Tensor::zeros(&[rank, dim]),
                    Tensor::zeros(&[rank, dim]),
                    Tensor::zeros(&[dim, rank]),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let learned = (default_context == DefaultContext::Learned).then(|| Tensor::zeros(&[dim]));
        let mut model = ContextualizerModel::from_parts(config, placeholder, learned, Tensor::zeros(&[dim]), 0.0)?;
        model.set_flat_parameters(&flat)?;
        Ok(Self {
            model,
            init_seed,
            embedding_seed,
            embeddings,
        })
    }
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
            .ok_or_else(|| Error::Format("truncated checkpoint".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("size overflow".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(dc: DefaultContext, recurrent: bool) -> ContextualizerModel {
        let cfg = ModelConfig {
            dim: 6,
            rank: 2,
            steps: 3,
            recurrent,
            default_context: dc,
        };
        ContextualizerModel::new(cfg, 17).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        for (dc, rec) in [
            (DefaultContext::Ones, true),
            (DefaultContext::Learned, false),
            (DefaultContext::Random, true),
        ] {
            let ck = Checkpoint {
                model: model(dc, rec),
                init_seed: 17,
                embedding_seed: 99,
                embeddings: (dc == DefaultContext::Learned).then(|| Tensor::full(&[4, 3], 0.25)),
            };
            let mut buf = Vec::new();
            ck.write_to(&mut buf).unwrap();
            assert_eq!(&buf[..4], b"CTXZ");
            assert_eq!(buf[4], VERSION);
            assert_eq!(Checkpoint::read_from(buf.as_slice()).unwrap(), ck);
        }
    }

    #[test]
    fn header_is_little_endian() {
        let ck = Checkpoint {
            model: model(DefaultContext::Ones, true),
            init_seed: 1,
            embedding_seed: 2,
            embeddings: None,
        };
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        assert_eq!(&buf[5..9], &6u32.to_le_bytes());
        let first_param = f64::from_le_bytes(buf[51..59].try_into().unwrap());
        assert_eq!(first_param, ck.model.flat_parameters()[0]);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let ck = Checkpoint {
            model: model(DefaultContext::Ones, true),
            init_seed: 1,
            embedding_seed: 2,
            embeddings: None,
        };
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        assert!(Checkpoint::read_from(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(Checkpoint::read_from(bad.as_slice()).is_err());
        let mut bad = buf;
        bad[0] = b'X';
        assert!(Checkpoint::read_from(bad.as_slice()).is_err());
    }
}
