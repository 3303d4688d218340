//! From raw text to combined word+position vectors.

mod embedding;
mod position;
mod tokenize;
mod vocab;

pub use embedding::{EmbeddingHeader, EmbeddingTable};
pub use position::PositionEncoder;
pub use tokenize::tokenize;
pub use vocab::{Vocabulary, OOV_INDEX};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Token vectors `x_1..x_n` of one document, each the concatenation of the
/// word embedding and the position vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedDocument {
    pub vectors: Tensor,
    pub token_ids: Vec<usize>,
    pub label: bool,
}

impl EncodedDocument {
    /// Wraps precomputed token vectors (used for synthetic inputs).
    pub fn from_vectors(vectors: Tensor, label: bool) -> Result<Self> {
        if vectors.rank() != 2 {
            return Err(Error::shape("EncodedDocument", vectors.shape(), &[]));
        }
        let token_ids = vec![OOV_INDEX; vectors.rows()];
        Ok(Self {
            vectors,
            token_ids,
            label,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }
}

/// Vocabulary, word vectors and position encoder for one fold.
#[derive(Clone, Debug)]
pub struct TextEncoder {
    pub vocab: Vocabulary,
    pub embeddings: EmbeddingTable,
    pub positions: PositionEncoder,
}

impl TextEncoder {
    pub fn new(vocab: Vocabulary, embeddings: EmbeddingTable, positions: PositionEncoder) -> Result<Self> {
        if embeddings.rows() != vocab.len() {
            return Err(Error::shape(
                "TextEncoder",
                &[vocab.len()],
                &[embeddings.rows(), embeddings.dim()],
            ));
        }
        Ok(Self {
            vocab,
            embeddings,
            positions,
        })
    }

    /// `m = v + p`.
    pub fn dim(&self) -> usize {
        self.embeddings.dim() + self.positions.dim()
    }

    pub fn token_ids<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.vocab.index(t.as_ref())).collect()
    }

    /// `[n × p]` block of position vectors for positions `0..n`; `None`
    /// when positions are disabled (`p = 0`).
    pub fn position_block(&self, n: usize) -> Result<Option<Tensor>> {
        let p = self.positions.dim();
        if p == 0 {
            return Ok(None);
        }
        let mut data = Vec::with_capacity(n * p);
        for i in 0..n {
            data.extend(self.positions.encode(i));
        }
        Tensor::matrix(n, p, data).map(Some)
    }

    /// `x_i = [emb(w_i) ; pos(i)]` with 0-based positions.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S], label: bool) -> Result<EncodedDocument> {
        if tokens.is_empty() {
            return Err(Error::Input("cannot encode an empty document".into()));
        }
        let token_ids = self.token_ids(tokens);
        let vectors = self.vectors_for(&token_ids)?;
        Ok(EncodedDocument {
            vectors,
            token_ids,
            label,
        })
    }

    /// Rebuilds token vectors from ids against the current embedding table.
    pub fn vectors_for(&self, token_ids: &[usize]) -> Result<Tensor> {
        let m = self.dim();
        let mut data = Vec::with_capacity(token_ids.len() * m);
        for (pos, &id) in token_ids.iter().enumerate() {
            if id >= self.embeddings.rows() {
                return Err(Error::Input(format!("token id {id} out of vocabulary")));
            }
            data.extend_from_slice(self.embeddings.row(id));
            data.extend(self.positions.encode(pos));
        }
        Tensor::matrix(token_ids.len(), m, data)
    }
}
