//! The Contextualizer: a context vector refined over `K` steps of
//! second-order attention, then mapped to a single logit.

mod attention;
mod checkpoint;
mod complexity;
pub mod oracle;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Tape, Tensor, Var};
use crate::text::EncodedDocument;

pub use attention::{
    candidate_weights, candidate_weights_on, contextualize_step, contextualize_step_on, token_wise_step_on,
    AttentionStep, StepOutput, StepVars,
};
pub use checkpoint::Checkpoint;
pub use complexity::{count_macs, loglog_slope, measure_step_macs, pairwise_macs, probe, ProbeRow, Variant};

/// How `c^(0)` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefaultContext {
    /// The all-ones vector.
    Ones,
    /// A trained vector `c_d`, initialized to ones.
    Learned,
    /// A fresh Uniform(-1, 1) draw for every document.
    Random,
}

impl DefaultContext {
    pub fn tag(self) -> u8 {
        match self {
            DefaultContext::Ones => 0,
            DefaultContext::Learned => 1,
            DefaultContext::Random => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(DefaultContext::Ones),
            1 => Some(DefaultContext::Learned),
            2 => Some(DefaultContext::Random),
            _ => None,
        }
    }
}

impl fmt::Display for DefaultContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefaultContext::Ones => "ones",
            DefaultContext::Learned => "learned",
            DefaultContext::Random => "random",
        })
    }
}

impl FromStr for DefaultContext {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ones" | "constant" | "one" => Ok(DefaultContext::Ones),
            "learned" | "learnt" => Ok(DefaultContext::Learned),
            "random" | "uniform" => Ok(DefaultContext::Random),
            other => Err(Error::Input(format!("unknown default context {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Token/context dimension `m`.
    pub dim: usize,
    /// Factorization rank `u`.
    pub rank: usize,
    /// Number of contextualization steps `K`.
    pub steps: usize,
    /// Share one `(U, V, W)` across all steps.
    pub recurrent: bool,
    pub default_context: DefaultContext,
}

impl ModelConfig {
    /// Trainable parameters of the attention stack, default context and
    /// classifier (embeddings excluded).
    pub fn parameter_count(&self) -> usize {
        let triples = if self.recurrent { 1 } else { self.steps.max(1) };
        let context = if self.default_context == DefaultContext::Learned {
            self.dim
        } else {
            0
        };
        triples * 3 * self.rank * self.dim + context + self.dim + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContextualizerModel {
    config: ModelConfig,
    steps: Vec<AttentionStep>,
    learned_context: Option<Tensor>,
    classifier_weight: Tensor,
    classifier_bias: Tensor,
}

/// Contexts `c^(0)..c^(K)` and weights `α^(1)..α^(K)` of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextTrace {
    pub contexts: Vec<Vec<f64>>,
    pub weights: Vec<Tensor>,
}

/// Model parameters placed on a tape, in canonical parameter order.
#[derive(Clone, Debug)]
pub struct ModelVars {
    pub steps: Vec<StepVars>,
    pub learned_context: Option<Var>,
    pub classifier_weight: Var,
    pub classifier_bias: Var,
}

impl ModelVars {
    pub fn all(&self) -> Vec<Var> {
        let mut out = Vec::with_capacity(self.steps.len() * 3 + 3);
        for s in &self.steps {
            out.extend([s.u, s.v, s.w]);
        }
        out.extend(self.learned_context);
        out.push(self.classifier_weight);
        out.push(self.classifier_bias);
        out
    }
}

/// Vars recorded by [`ContextualizerModel::record_forward`].
#[derive(Clone, Debug)]
pub struct ForwardVars {
    pub logit: Var,
    pub contexts: Vec<Var>,
    pub weights: Vec<Var>,
}

impl ContextualizerModel {
    /// Fresh model with Glorot-uniform attention and classifier weights drawn
    /// from `seed`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        if config.dim == 0 || config.rank == 0 {
            return Err(Error::Input(format!(
                "model needs positive dim and rank, got m={} u={}",
                config.dim, config.rank
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triples = if config.recurrent { 1 } else { config.steps.max(1) };
        let steps = (0..triples)
            .map(|_| AttentionStep::glorot(config.dim, config.rank, &mut rng))
            .collect();
        let learned_context =
            (config.default_context == DefaultContext::Learned).then(|| Tensor::ones(&[config.dim]));
        let limit = (6.0 / (config.dim + 1) as f64).sqrt();
        let classifier_weight = Tensor::uniform(&[config.dim], -limit, limit, &mut rng);
        Ok(Self {
            config,
            steps,
            learned_context,
            classifier_weight,
            classifier_bias: Tensor::scalar(0.0),
        })
    }

    pub fn from_parts(
        config: ModelConfig,
        steps: Vec<AttentionStep>,
        learned_context: Option<Tensor>,
        classifier_weight: Tensor,
        classifier_bias: f64,
    ) -> Result<Self> {
        let triples = if config.recurrent { 1 } else { config.steps.max(1) };
        if steps.len() != triples {
            return Err(Error::Input(format!("expected {triples} attention steps, got {}", steps.len())));
        }
        for s in &steps {
            if s.dim() != config.dim || s.rank() != config.rank {
                return Err(Error::shape("from_parts", &[config.rank, config.dim], s.u.shape()));
            }
        }
        if classifier_weight.shape() != [config.dim] {
            return Err(Error::shape("from_parts", &[config.dim], classifier_weight.shape()));
        }
        if (config.default_context == DefaultContext::Learned) != learned_context.is_some() {
            return Err(Error::Input("learned context present iff strategy is learned".into()));
        }
        Ok(Self {
            config,
            steps,
            learned_context,
            classifier_weight,
            classifier_bias: Tensor::scalar(classifier_bias),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn steps(&self) -> &[AttentionStep] {
        &self.steps
    }

    /// The attention triple used at step `k` (0-based).
    pub fn step(&self, k: usize) -> &AttentionStep {
        if self.config.recurrent {
            &self.steps[0]
        } else {
            &self.steps[k]
        }
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut out: Vec<&Tensor> = Vec::new();
        for s in &self.steps {
            out.extend([&s.u, &s.v, &s.w]);
        }
        out.extend(self.learned_context.as_ref());
        out.push(&self.classifier_weight);
        out.push(&self.classifier_bias);
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::new();
        for s in &mut self.steps {
            out.push(&mut s.u);
            out.push(&mut s.v);
            out.push(&mut s.w);
        }
        out.extend(self.learned_context.as_mut());
        out.push(&mut self.classifier_weight);
        out.push(&mut self.classifier_bias);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    pub fn flat_parameters(&self) -> Vec<f64> {
        self.parameters()
            .iter()
            .flat_map(|t| t.data().iter().copied())
            .collect()
    }

    pub fn set_flat_parameters(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::shape(
                "set_flat_parameters",
                &[self.parameter_count()],
                &[flat.len()],
            ));
        }
        let mut offset = 0;
        for t in self.parameters_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn record_parameters(&self, tape: &mut Tape, trainable: bool) -> ModelVars {
        let steps = self.steps.iter().map(|s| s.record(tape, trainable)).collect();
        let mut put = |t: &Tensor| {
            if trainable {
                tape.param(t.clone())
            } else {
                tape.constant(t.clone())
            }
        };
        let learned_context = self.learned_context.as_ref().map(&mut put);
        let classifier_weight = put(&self.classifier_weight);
        let classifier_bias = put(&self.classifier_bias);
        ModelVars {
            steps,
            learned_context,
            classifier_weight,
            classifier_bias,
        }
    }

    /// Places `c^(0)` on the tape. `rng` is only drawn from for
    /// [`DefaultContext::Random`].
    pub fn record_initial_context<R: Rng + ?Sized>(&self, tape: &mut Tape, vars: &ModelVars, rng: &mut R) -> Var {
        match self.config.default_context {
            DefaultContext::Ones => tape.constant(Tensor::ones(&[self.config.dim])),
            DefaultContext::Learned => vars.learned_context.expect("learned context recorded"),
            DefaultContext::Random => {
                tape.constant(Tensor::uniform(&[self.config.dim], -1.0, 1.0, rng))
            }
        }
    }

    fn step_vars(&self, vars: &ModelVars, k: usize) -> StepVars {
        if self.config.recurrent {
            vars.steps[0]
        } else {
            vars.steps[k]
        }
    }

    /// Records `K` contextualization steps from `context` over `tokens`
    /// (`[n × m]`) and the affine classifier on the final context.
    pub fn record_forward(&self, tape: &mut Tape, vars: &ModelVars, tokens: Var, context: Var) -> Result<ForwardVars> {
        let shape = tape.value(tokens).shape().to_vec();
        if shape.len() != 2 || shape[1] != self.config.dim {
            return Err(Error::shape("forward", &[0, self.config.dim], &shape));
        }
        let mut contexts = vec![context];
        let mut weights = Vec::with_capacity(self.config.steps);
        let mut c = context;
        for k in 0..self.config.steps {
            let out = contextualize_step_on(tape, self.step_vars(vars, k), tokens, c)?;
            c = out.context;
            contexts.push(c);
            weights.push(out.weights);
        }
        let logit = self.record_classifier(tape, vars, c)?;
        Ok(ForwardVars {
            logit,
            contexts,
            weights,
        })
    }

    fn record_classifier(&self, tape: &mut Tape, vars: &ModelVars, features: Var) -> Result<Var> {
        let score = tape.dot(vars.classifier_weight, features)?;
        tape.add(score, vars.classifier_bias)
    }

    /// Logit and trace for one document.
    pub fn forward<R: Rng + ?Sized>(&self, doc: &EncodedDocument, rng: &mut R) -> Result<(f64, ContextTrace)> {
        if doc.is_empty() {
            return Err(Error::Input("forward on an empty document".into()));
        }
        let mut tape = Tape::new();
        let vars = self.record_parameters(&mut tape, false);
        let tokens = tape.constant(doc.vectors.clone());
        let c0 = self.record_initial_context(&mut tape, &vars, rng);
        let out = self.record_forward(&mut tape, &vars, tokens, c0)?;
        let trace = ContextTrace {
            contexts: out
                .contexts
                .iter()
                .map(|v| tape.value(*v).data().to_vec())
                .collect(),
            weights: out.weights.iter().map(|v| tape.value(*v).clone()).collect(),
        };
        Ok((tape.value(out.logit).item(), trace))
    }

    /// Token-wise variant: `K` token-wise steps, mean pooling, classifier.
    pub fn record_token_wise_forward(&self, tape: &mut Tape, vars: &ModelVars, tokens: Var) -> Result<(Var, Vec<Var>)> {
        let shape = tape.value(tokens).shape().to_vec();
        if shape.len() != 2 || shape[1] != self.config.dim {
            return Err(Error::shape("token_wise_forward", &[0, self.config.dim], &shape));
        }
        let mut x = tokens;
        let mut layers = vec![x];
        for k in 0..self.config.steps {
            x = token_wise_step_on(tape, self.step_vars(vars, k), x)?;
            layers.push(x);
        }
        let total = tape.sum_rows(x)?;
        let pooled = tape.scale(total, 1.0 / shape[0] as f64);
        let logit = self.record_classifier(tape, vars, pooled)?;
        Ok((logit, layers))
    }

    /// Logit and per-step token matrices of the token-wise variant.
    pub fn token_wise_forward(&self, doc: &EncodedDocument) -> Result<(f64, Vec<Tensor>)> {
        if doc.is_empty() {
            return Err(Error::Input("forward on an empty document".into()));
        }
        let mut tape = Tape::new();
        let vars = self.record_parameters(&mut tape, false);
        let tokens = tape.constant(doc.vectors.clone());
        let (logit, layers) = self.record_token_wise_forward(&mut tape, &vars, tokens)?;
        let traces = layers.iter().map(|v| tape.value(*v).clone()).collect();
        Ok((tape.value(logit).item(), traces))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dim: usize, rank: usize, steps: usize, recurrent: bool, dc: DefaultContext) -> ModelConfig {
        ModelConfig {
            dim,
            rank,
            steps,
            recurrent,
            default_context: dc,
        }
    }

    fn doc(n: usize, m: usize, seed: u64) -> EncodedDocument {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EncodedDocument::from_vectors(Tensor::uniform(&[n, m], -1.0, 1.0, &mut rng), true).unwrap()
    }

    #[test]
    fn paper_scale_parameter_count() {
        let c = cfg(520, 100, 10, true, DefaultContext::Random);
        assert_eq!(c.parameter_count(), 156_521);
        let model = ContextualizerModel::new(cfg(52, 10, 3, true, DefaultContext::Random), 0).unwrap();
        assert_eq!(model.parameter_count(), model.config().parameter_count());
        assert_eq!(model.flat_parameters().len(), 3 * 10 * 52 + 52 + 1);
    }

    #[test]
    fn recurrent_count_ignores_k() {
        let counts: Vec<usize> = [1, 5, 10, 20]
            .iter()
            .map(|&k| {
                ContextualizerModel::new(cfg(12, 3, k, true, DefaultContext::Ones), 1)
                    .unwrap()
                    .flat_parameters()
                    .len()
            })
            .collect();
        assert!(counts.windows(2).all(|w| w[0] == w[1]));
        let regular = ContextualizerModel::new(cfg(12, 3, 20, false, DefaultContext::Ones), 1).unwrap();
        assert_eq!(regular.parameter_count(), 20 * 3 * 3 * 12 + 13);
    }

    #[test]
    fn zero_steps_depend_only_on_initial_context() {
        let model = ContextualizerModel::new(cfg(6, 2, 0, true, DefaultContext::Ones), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, ta) = model.forward(&doc(3, 6, 1), &mut rng).unwrap();
        let (b, _) = model.forward(&doc(5, 6, 2), &mut rng).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta.contexts.len(), 1);
        assert!(ta.weights.is_empty());
    }

    #[test]
    fn recurrent_k1_and_k5_share_parameters_but_not_outputs() {
        let m1 = ContextualizerModel::new(cfg(8, 3, 1, true, DefaultContext::Ones), 11).unwrap();
        let mut m5 = ContextualizerModel::new(cfg(8, 3, 5, true, DefaultContext::Ones), 99).unwrap();
        m5.set_flat_parameters(&m1.flat_parameters()).unwrap();
        assert_eq!(m1.flat_parameters(), m5.flat_parameters());
        let d = doc(4, 8, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, _) = m1.forward(&d, &mut rng).unwrap();
        let (b, tb) = m5.forward(&d, &mut rng).unwrap();
        assert_ne!(a, b);
        assert_eq!(tb.contexts.len(), 6);
    }

    #[test]
    fn trace_weights_normalize_and_contexts_stay_in_hull() {
        let model = ContextualizerModel::new(cfg(7, 3, 4, false, DefaultContext::Random), 5).unwrap();
        let d = doc(6, 7, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (_, trace) = model.forward(&d, &mut rng).unwrap();
        for w in &trace.weights {
            for j in 0..7 {
                let s: f64 = (0..6).map(|i| w.at(i, j)).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        for c in &trace.contexts[1..] {
            for (j, &cj) in c.iter().enumerate() {
                let col: Vec<f64> = (0..6).map(|i| d.vectors.at(i, j)).collect();
                let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert!(cj >= lo - 1e-12 && cj <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn learned_context_starts_at_ones() {
        let learned = ContextualizerModel::new(cfg(5, 2, 2, true, DefaultContext::Learned), 4).unwrap();
        let mut ones = ContextualizerModel::new(cfg(5, 2, 2, true, DefaultContext::Ones), 4).unwrap();
        let params = learned.flat_parameters();
        // drop c_d (5 entries after the single triple) to align with the ones model
        let mut aligned = params[..30].to_vec();
        aligned.extend_from_slice(&params[35..]);
        ones.set_flat_parameters(&aligned).unwrap();
        let d = doc(3, 5, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            learned.forward(&d, &mut rng).unwrap().0,
            ones.forward(&d, &mut rng).unwrap().0
        );
    }

    #[test]
    fn random_context_depends_on_rng() {
        let model = ContextualizerModel::new(cfg(5, 2, 1, true, DefaultContext::Random), 4).unwrap();
        let d = doc(3, 5, 9);
        let a = model.forward(&d, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = model.forward(&d, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let c = model.forward(&d, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.1.contexts[0], c.1.contexts[0]);
    }

    #[test]
    fn token_wise_single_token_is_fixed_point() {
        let model = ContextualizerModel::new(cfg(4, 2, 3, true, DefaultContext::Ones), 4).unwrap();
        let d = doc(1, 4, 3);
        let (_, layers) = model.token_wise_forward(&d).unwrap();
        assert_eq!(layers.len(), 4);
        for l in &layers {
            assert_eq!(l, &d.vectors);
        }
    }

    #[test]
    fn empty_and_misshaped_documents_fail() {
        let model = ContextualizerModel::new(cfg(4, 2, 1, true, DefaultContext::Ones), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(model.forward(&doc(2, 5, 0), &mut rng).is_err());
        let empty = EncodedDocument {
            vectors: Tensor::zeros(&[1, 4]),
            token_ids: Vec::new(),
            label: false,
        };
        assert!(matches!(model.forward(&empty, &mut rng), Err(Error::Input(_))));
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use crate::model::oracle;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn factored_weights_match_dense_tensor(m in 1usize..7, u in 1usize..7, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let step = AttentionStep::glorot(m, u, &mut rng);
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fast = candidate_weights(&step, &x, &c).unwrap();
            let slow = oracle::contract(&oracle::dense_tensor(&step), m, &x, &c);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn token_order_does_not_matter(
            n in 1usize..9,
            steps in 0usize..4,
            recurrent in any::<bool>(),
            seed in any::<u64>(),
            rotate in 0usize..9,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = ModelConfig { dim: 5, rank: 3, steps, recurrent, default_context: DefaultContext::Ones };
            let model = ContextualizerModel::new(cfg, seed).unwrap();
            let x = Tensor::uniform(&[n, 5], -1.0, 1.0, &mut rng);
            let mut rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
            rows.rotate_left(rotate % n);
            rows.reverse();
            let y = Tensor::from_rows(&rows).unwrap();
            let a = EncodedDocument::from_vectors(x, true).unwrap();
            let b = EncodedDocument::from_vectors(y, true).unwrap();
            let (za, _) = model.forward(&a, &mut rng).unwrap();
            let (zb, _) = model.forward(&b, &mut rng).unwrap();
            prop_assert!((za - zb).abs() < 1e-9);
        }
    }
}
