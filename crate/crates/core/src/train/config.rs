//! Experiment configuration and the `key = value` config-file format.

use serde::{Deserialize, Serialize};

use crate::data::DatasetName;
use crate::error::{Error, Result};
use crate::model::{DefaultContext, ModelConfig};
use crate::tensor::AdamConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetName,
    /// Contextualization steps `K`.
    pub steps: usize,
    pub recurrent: bool,
    pub default_context: DefaultContext,
    /// Word vector size `v`.
    pub embedding_dim: usize,
    /// Position vector size `p`.
    pub position_dim: usize,
    /// Factorization rank `u`.
    pub rank: usize,
    pub learn_embeddings: bool,
    pub min_count: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Frozen random 500-d word vectors, 20-d positions, rank 100.
    pub fn frozen_profile(dataset: DatasetName) -> Self {
        Self {
            dataset,
            steps: 10,
            recurrent: true,
            default_context: DefaultContext::Random,
            embedding_dim: 500,
            position_dim: 20,
            rank: 100,
            learn_embeddings: false,
            min_count: 3,
            epochs: 10,
            batch_size: 64,
            adam: AdamConfig::default(),
            seed: 7,
        }
    }

    /// Learned 250-d word vectors, five recurrent steps, random default.
    pub fn learned_profile(dataset: DatasetName) -> Self {
        Self {
            steps: 5,
            embedding_dim: 250,
            learn_embeddings: true,
            ..Self::frozen_profile(dataset)
        }
    }

    /// Small model for the marker-token sanity task: per-document updates
    /// and a larger step size so ten epochs over a few documents suffice.
    pub fn marker_profile() -> Self {
        Self {
            steps: 1,
            default_context: DefaultContext::Ones,
            embedding_dim: 64,
            position_dim: 4,
            rank: 8,
            batch_size: 1,
            adam: AdamConfig {
                learning_rate: 0.01,
                ..AdamConfig::default()
            },
            ..Self::frozen_profile(DatasetName::Mr)
        }
    }

    /// Token vector size `m = v + p`.
    pub fn dim(&self) -> usize {
        self.embedding_dim + self.position_dim
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            dim: self.dim(),
            rank: self.rank,
            steps: self.steps,
            recurrent: self.recurrent,
            default_context: self.default_context,
        }
    }

    /// Trainable parameters for a vocabulary of `vocab_len` rows (OOV row
    /// included).
    pub fn parameter_count(&self, vocab_len: usize) -> usize {
        let emb = if self.learn_embeddings {
            vocab_len * self.embedding_dim
        } else {
            0
        };
        self.model_config().parameter_count() + emb
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Input(msg.to_string()));
        if self.embedding_dim == 0 {
            return bad("embedding_dim must be positive");
        }
        if self.rank == 0 {
            return bad("rank must be positive");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive");
        }
        if self.min_count == 0 {
            return bad("min_count must be positive");
        }
        let a = &self.adam;
        if !(a.learning_rate > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.epsilon > 0.0) {
            return bad("invalid Adam hyperparameters");
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Input(format!("{key}: cannot parse {value:?}")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(Error::Input(format!("{key}: expected true or false, got {value:?}"))),
            }
        }
        match key {
            "dataset" => self.dataset = value.parse()?,
            "K" | "k" | "steps" => self.steps = num(key, value)?,
            "recurrent" => self.recurrent = flag(key, value)?,
            "default_context" | "default-context" => self.default_context = value.parse()?,
            "v" | "embedding_dim" => self.embedding_dim = num(key, value)?,
            "p" | "position_dim" => self.position_dim = num(key, value)?,
            "u" | "rank" => self.rank = num(key, value)?,
            "learn_embeddings" | "learn-embeddings" => self.learn_embeddings = flag(key, value)?,
            "min_count" => self.min_count = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "learning_rate" | "lr" => self.adam.learning_rate = num(key, value)?,
            "beta1" => self.adam.beta1 = num(key, value)?,
            "beta2" => self.adam.beta2 = num(key, value)?,
            "epsilon" => self.adam.epsilon = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::Input(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`. `#` starts a comment.
    /// A `profile = frozen|learned` line resets to that profile first and
    /// must come before other keys to have effect on them.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("config line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "profile" {
                *self = match value {
                    "frozen" => Self::frozen_profile(self.dataset),
                    "learned" => Self::learned_profile(self.dataset),
                    _ => return Err(Error::Input(format!("unknown profile {value:?}"))),
                };
                continue;
            }
            self.set(key, value)
                .map_err(|e| Error::Input(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// The config rendered in the format read by [`apply_text`](Self::apply_text).
    pub fn to_text(&self) -> String {
        format!(
            "dataset = {}\nK = {}\nrecurrent = {}\ndefault_context = {}\nv = {}\np = {}\nu = {}\n\
             learn_embeddings = {}\nmin_count = {}\nepochs = {}\nbatch_size = {}\nlearning_rate = {}\n\
             beta1 = {}\nbeta2 = {}\nepsilon = {}\nseed = {}\n",
            self.dataset,
            self.steps,
            self.recurrent,
            self.default_context,
            self.embedding_dim,
            self.position_dim,
            self.rank,
            self.learn_embeddings,
            self.min_count,
            self.epochs,
            self.batch_size,
            self.adam.learning_rate,
            self.adam.beta1,
            self.adam.beta2,
            self.adam.epsilon,
            self.seed
        )
    }

    /// Short stable identifier used to name run directories.
    pub fn run_id(&self) -> String {
        format!(
            "{}-K{}-{}-{}-v{}-p{}-u{}{}-s{}",
            self.dataset,
            self.steps,
            if self.recurrent { "rec" } else { "reg" },
            self.default_context,
            self.embedding_dim,
            self.position_dim,
            self.rank,
            if self.learn_embeddings { "-learned" } else { "" },
            self.seed
        )
    }
}
