use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Word vectors drawn from Uniform(-1, 1). The table is fully determined by
/// `(seed, rows, dim)`, so it can be stored as a header alone.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    vectors: Tensor,
    trainable: bool,
    seed: u64,
}

impl EmbeddingTable {
    pub fn new(rows: usize, dim: usize, seed: u64, trainable: bool) -> Result<Self> {
        if rows == 0 || dim == 0 {
            return Err(Error::Input(format!("embedding table {rows}x{dim}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors = Tensor::uniform(&[rows, dim], -1.0, 1.0, &mut rng);
        Ok(Self {
            vectors,
            trainable,
            seed,
        })
    }

    pub fn rows(&self) -> usize {
        self.vectors.rows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trainable(&self) -> bool {
        self.trainable
    }

    pub fn vectors(&self) -> &Tensor {
        &self.vectors
    }

    /// Mutable access for the optimizer; refused on frozen tables.
    pub fn vectors_mut(&mut self) -> Result<&mut Tensor> {
        if !self.trainable {
            return Err(Error::Contract("frozen embedding table is read-only".into()));
        }
        Ok(&mut self.vectors)
    }

    pub fn row(&self, index: usize) -> &[f64] {
        self.vectors.row(index)
    }

    /// Rows for `ids`, stacked as an `[ids.len() × dim]` matrix.
    pub fn gather(&self, ids: &[usize]) -> Result<Tensor> {
        let mut data = Vec::with_capacity(ids.len() * self.dim());
        for &id in ids {
            if id >= self.rows() {
                return Err(Error::Input(format!("embedding row {id} out of {}", self.rows())));
            }
            data.extend_from_slice(self.row(id));
        }
        Tensor::matrix(ids.len(), self.dim(), data)
    }

    pub fn header(&self) -> EmbeddingHeader {
        EmbeddingHeader {
            seed: self.seed,
            rows: self.rows(),
            dim: self.dim(),
        }
    }
}

/// Text form of an embedding table: `embedding v1 seed=<s> rows=<r> dim=<d>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbeddingHeader {
    pub seed: u64,
    pub rows: usize,
    pub dim: usize,
}

impl EmbeddingHeader {
    pub fn materialize(&self, trainable: bool) -> Result<EmbeddingTable> {
        EmbeddingTable::new(self.rows, self.dim, self.seed, trainable)
    }
}

impl fmt::Display for EmbeddingHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "embedding v1 seed={} rows={} dim={}", self.seed, self.rows, self.dim)
    }
}

impl FromStr for EmbeddingHeader {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("embedding header {s:?}"));
        let mut parts = s.split_whitespace();
        if parts.next() != Some("embedding") || parts.next() != Some("v1") {
            return Err(bad());
        }
        let (mut seed, mut rows, mut dim) = (None, None, None);
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            match k {
                "seed" => seed = v.parse().ok(),
                "rows" => rows = v.parse().ok(),
                "dim" => dim = v.parse().ok(),
                _ => return Err(bad()),
            }
        }
        Ok(Self {
            seed: seed.ok_or_else(bad)?,
            rows: rows.ok_or_else(bad)?,
            dim: dim.ok_or_else(bad)?,
        })
    }
}
