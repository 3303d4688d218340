//! One cross-validation fold: vocabulary, embeddings, training, selection.

use std::time::Instant;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, evaluate, ExperimentConfig, Stream};
use crate::data::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::model::{Checkpoint, ContextualizerModel};
use crate::tensor::{Adam, Tape, Tensor};
use crate::text::{tokenize, EmbeddingTable, EncodedDocument, PositionEncoder, TextEncoder, Vocabulary};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub best_dev_accuracy: f64,
    pub test_accuracy: f64,
    /// 1-based epoch of the retained snapshot.
    pub best_epoch: usize,
    pub parameter_count: usize,
    pub vocabulary_size: usize,
    pub train_documents: usize,
    pub dev_documents: usize,
    pub test_documents: usize,
    pub epochs: Vec<EpochStats>,
    pub wall_time_secs: f64,
}

/// Everything a finished fold produced.
#[derive(Clone, Debug)]
pub struct FoldOutcome {
    pub result: FoldResult,
    /// The best-dev snapshot.
    pub checkpoint: Checkpoint,
    /// Encoder as used by the snapshot (learned embeddings included).
    pub encoder: TextEncoder,
}

/// Which split a document belongs to for a given fold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Train,
    Dev,
    Test,
}

pub fn roles(plan: &FoldPlan, fold: usize) -> Vec<Role> {
    (0..plan.len())
        .map(|i| {
            if plan.fold[i] == fold {
                Role::Test
            } else if plan.is_dev(i, fold) {
                Role::Dev
            } else {
                Role::Train
            }
        })
        .collect()
}

/// Vocabulary of the training split of `fold` only.
pub fn fold_vocabulary(tokens: &[Vec<String>], roles: &[Role], min_count: usize) -> Result<Vocabulary> {
    let train: Vec<Vec<&str>> = tokens
        .iter()
        .zip(roles)
        .filter(|(_, r)| **r == Role::Train)
        .map(|(t, _)| t.iter().map(String::as_str).collect())
        .collect();
    Vocabulary::build(&train, min_count)
}

struct DocGradient {
    loss: f64,
    grads: Vec<Tensor>,
    /// Gradient with respect to the gathered word vectors, `[n × v]`.
    word_grads: Option<Tensor>,
}

fn doc_gradient(
    model: &ContextualizerModel,
    encoder: &TextEncoder,
    ids: &[usize],
    label: bool,
    context_seed: u64,
) -> Result<DocGradient> {
    let mut tape = Tape::new();
    let vars = model.record_parameters(&mut tape, true);
    let (tokens, words) = if encoder.embeddings.trainable() {
        let words = tape.param(encoder.embeddings.gather(ids)?);
        let tokens = match encoder.position_block(ids.len())? {
            Some(p) => {
                let p = tape.constant(p);
                tape.concat_cols(words, p)?
            }
            None => words,
        };
        (tokens, Some(words))
    } else {
        (tape.constant(encoder.vectors_for(ids)?), None)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(context_seed);
    let c0 = model.record_initial_context(&mut tape, &vars, &mut rng);
    let out = model.record_forward(&mut tape, &vars, tokens, c0)?;
    let loss = tape.bce_with_logits(out.logit, if label { 1.0 } else { 0.0 })?;
    let loss_value = tape.value(loss).item();
    if !loss_value.is_finite() {
        return Err(Error::Numeric("loss"));
    }
    tape.backward(loss)?;
    let grads = vars
        .all()
        .into_iter()
        .map(|v| {
            let shape = tape.value(v).shape().to_vec();
            tape.take_grad(v).unwrap_or_else(|| Tensor::zeros(&shape))
        })
        .collect();
    let word_grads = words.map(|w| {
        let shape = tape.value(w).shape().to_vec();
        tape.take_grad(w).unwrap_or_else(|| Tensor::zeros(&shape))
    });
    Ok(DocGradient {
        loss: loss_value,
        grads,
        word_grads,
    })
}

fn encode_all(encoder: &TextEncoder, ids: &[Vec<usize>], labels: &[bool], which: &[usize]) -> Result<Vec<EncodedDocument>> {
    which
        .iter()
        .map(|&i| {
            Ok(EncodedDocument {
                vectors: encoder.vectors_for(&ids[i])?,
                token_ids: ids[i].clone(),
                label: labels[i],
            })
        })
        .collect()
}

/// Trains on the training split of `fold`, selects the epoch with the best
/// dev accuracy and reports test accuracy of that snapshot.
pub fn train_fold(config: &ExperimentConfig, ds: &Dataset, plan: &FoldPlan, fold: usize) -> Result<FoldOutcome> {
    config.validate()?;
    if fold >= crate::data::FOLDS {
        return Err(Error::Input(format!("fold {fold} out of range")));
    }
    if plan.len() != ds.len() {
        return Err(Error::Input(format!(
            "fold plan covers {} documents, dataset has {}",
            plan.len(),
            ds.len()
        )));
    }
    let started = Instant::now();
    let master = config.seed;
    let fold_key = fold as u64;

    let tokens: Vec<Vec<String>> = ds.documents.iter().map(|d| tokenize(&d.text)).collect();
    if let Some(d) = tokens.iter().position(Vec::is_empty) {
        return Err(Error::Input(format!("document {d} has no tokens")));
    }
    let labels = ds.labels();
    let roles = roles(plan, fold);
    let pick = |r: Role| -> Vec<usize> { (0..ds.len()).filter(|&i| roles[i] == r).collect() };
    let (train, dev, test) = (pick(Role::Train), pick(Role::Dev), pick(Role::Test));

    let vocab = fold_vocabulary(&tokens, &roles, config.min_count)?;
    let embeddings = EmbeddingTable::new(
        vocab.len(),
        config.embedding_dim,
        derive_seed(master, &[fold_key, Stream::Embedding as u64]),
        config.learn_embeddings,
    )?;
    let mut encoder = TextEncoder::new(vocab, embeddings, PositionEncoder::new(config.position_dim))?;
    let ids: Vec<Vec<usize>> = tokens.iter().map(|t| encoder.token_ids(t)).collect();

    let init_seed = derive_seed(master, &[fold_key, Stream::Init as u64]);
    let mut model = ContextualizerModel::new(config.model_config(), init_seed)?;
    let parameter_count = config.parameter_count(encoder.vocab.len());
    debug_assert_eq!(
        parameter_count,
        model.parameter_count() + if config.learn_embeddings { encoder.embeddings.vectors().len() } else { 0 }
    );
    info!(
        "fold {fold}: train {} dev {} test {} vocab {} params {parameter_count}",
        train.len(),
        dev.len(),
        test.len(),
        encoder.vocab.len()
    );

    let mut tracked: Vec<&Tensor> = model.parameters();
    if config.learn_embeddings {
        tracked.push(encoder.embeddings.vectors());
    }
    let mut adam = Adam::new(config.adam, tracked);
    let eval_seed = derive_seed(master, &[fold_key, Stream::Evaluation as u64]);

    let mut best: Option<(f64, usize, ContextualizerModel, Option<Tensor>)> = None;
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let mut order = train.clone();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(
            master,
            &[fold_key, Stream::Shuffle as u64, epoch as u64],
        )));
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let diverged = |loss: f64| Error::Diverged {
                epoch: epoch + 1,
                batch: b + 1,
                loss,
            };
            let per_doc: Vec<Result<DocGradient>> = batch
                .par_iter()
                .map(|&d| {
                    let seed = derive_seed(master, &[fold_key, Stream::Context as u64, epoch as u64, d as u64]);
                    doc_gradient(&model, &encoder, &ids[d], labels[d], seed)
                })
                .collect();

            // Fixed summation order keeps runs bit-reproducible.
            let mut sums: Vec<Tensor> = model.parameters().iter().map(|p| Tensor::zeros(p.shape())).collect();
            let mut word_sum = config
                .learn_embeddings
                .then(|| Tensor::zeros(encoder.embeddings.vectors().shape()));
            let mut batch_loss = 0.0;
            for (&d, g) in batch.iter().zip(per_doc) {
                let g = g.map_err(|e| match e {
                    Error::Numeric(_) => diverged(f64::NAN),
                    other => other,
                })?;
                batch_loss += g.loss;
                for (s, gi) in sums.iter_mut().zip(&g.grads) {
                    for (a, b) in s.data_mut().iter_mut().zip(gi.data()) {
                        *a += b;
                    }
                }
                if let (Some(ws), Some(wg)) = (word_sum.as_mut(), g.word_grads.as_ref()) {
                    let v = ws.cols();
                    for (pos, &id) in ids[d].iter().enumerate() {
                        let dst = &mut ws.data_mut()[id * v..(id + 1) * v];
                        for (a, b) in dst.iter_mut().zip(wg.row(pos)) {
                            *a += b;
                        }
                    }
                }
            }
            let scale = 1.0 / batch.len() as f64;
            batch_loss *= scale;
            if !batch_loss.is_finite() {
                return Err(diverged(batch_loss));
            }
            epoch_loss += batch_loss * batch.len() as f64;
            for s in sums.iter_mut().chain(word_sum.iter_mut()) {
                s.data_mut().iter_mut().for_each(|x| *x *= scale);
            }

            let mut params = model.parameters_mut();
            if config.learn_embeddings {
                params.push(encoder.embeddings.vectors_mut()?);
            }
            let mut grads: Vec<&mut Tensor> = sums.iter_mut().chain(word_sum.iter_mut()).collect();
            adam.step(&mut params, &mut grads)?;
            if !params.iter().all(|p| p.all_finite()) {
                return Err(diverged(batch_loss));
            }
        }

        let dev_docs = encode_all(&encoder, &ids, &labels, &dev)?;
        let dev_accuracy = evaluate(&model, &dev_docs, eval_seed)?;
        let train_loss = epoch_loss / train.len() as f64;
        debug!("fold {fold} epoch {}: loss {train_loss:.4} dev {dev_accuracy:.4}", epoch + 1);
        history.push(EpochStats {
            epoch: epoch + 1,
            train_loss,
            dev_accuracy,
        });
        if best.as_ref().is_none_or(|b| dev_accuracy >= b.0) {
            let emb = config.learn_embeddings.then(|| encoder.embeddings.vectors().clone());
            best = Some((dev_accuracy, epoch + 1, model.clone(), emb));
        }
    }

    let (best_dev_accuracy, best_epoch, best_model, best_embeddings) = best.expect("at least one epoch");
    if let Some(e) = &best_embeddings {
        *encoder.embeddings.vectors_mut()? = e.clone();
    }
    let test_docs = encode_all(&encoder, &ids, &labels, &test)?;
    let test_accuracy = evaluate(&best_model, &test_docs, eval_seed)?;
    info!("fold {fold}: best epoch {best_epoch} dev {best_dev_accuracy:.4} test {test_accuracy:.4}");

    Ok(FoldOutcome {
        result: FoldResult {
            fold,
            best_dev_accuracy,
            test_accuracy,
            best_epoch,
            parameter_count,
            vocabulary_size: encoder.vocab.len(),
            train_documents: train.len(),
            dev_documents: dev.len(),
            test_documents: test.len(),
            epochs: history,
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
        checkpoint: Checkpoint {
            model: best_model,
            init_seed,
            embedding_seed: encoder.embeddings.seed(),
            embeddings: best_embeddings,
        },
        encoder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic;
    use crate::model::DefaultContext;

    fn sanity_config() -> ExperimentConfig {
        ExperimentConfig::marker_profile()
    }

    fn strip_time(mut r: FoldResult) -> FoldResult {
        r.wall_time_secs = 0.0;
        r
    }

    #[test]
    fn marker_task_is_learned() {
        let cfg = sanity_config();
        let ds = synthetic::marker_task(20, cfg.seed);
        let plan = FoldPlan::make(&ds, cfg.seed).unwrap();
        for f in 0..crate::data::FOLDS {
            let out = train_fold(&cfg, &ds, &plan, f).unwrap();
            assert_eq!(out.result.test_accuracy, 1.0, "fold {f}: {:?}", out.result);
            assert!(out.result.best_dev_accuracy >= out.result.epochs[0].dev_accuracy);
        }
    }

    #[test]
    fn rerun_is_bit_identical() {
        let ds = synthetic::marker_task(30, 4);
        let mut cfg = sanity_config();
        cfg.default_context = DefaultContext::Random;
        cfg.epochs = 3;
        let plan = FoldPlan::make(&ds, cfg.seed).unwrap();
        let a = train_fold(&cfg, &ds, &plan, 1).unwrap();
        let b = train_fold(&cfg, &ds, &plan, 1).unwrap();
        assert_eq!(strip_time(a.result), strip_time(b.result));
        assert_eq!(a.checkpoint, b.checkpoint);
    }

    #[test]
    fn frozen_embeddings_are_untouched_and_learned_ones_move() {
        let ds = synthetic::marker_task(20, 5);
        let mut cfg = sanity_config();
        cfg.epochs = 2;
        let plan = FoldPlan::make(&ds, cfg.seed).unwrap();
        let out = train_fold(&cfg, &ds, &plan, 0).unwrap();
        let fresh = out.encoder.embeddings.header().materialize(false).unwrap();
        assert_eq!(out.encoder.embeddings.vectors(), fresh.vectors());
        assert!(out.checkpoint.embeddings.is_none());

        cfg.learn_embeddings = true;
        let out = train_fold(&cfg, &ds, &plan, 0).unwrap();
        let fresh = out.encoder.embeddings.header().materialize(true).unwrap();
        assert_ne!(out.encoder.embeddings.vectors(), fresh.vectors());
        assert_eq!(out.checkpoint.embeddings.as_ref(), Some(out.encoder.embeddings.vectors()));
        assert_eq!(out.result.parameter_count, cfg.parameter_count(out.encoder.vocab.len()));
    }

    #[test]
    fn test_documents_do_not_leak() {
        let ds = synthetic::marker_task(30, 6);
        let mut cfg = sanity_config();
        cfg.epochs = 2;
        let plan = FoldPlan::make(&ds, cfg.seed).unwrap();
        let base = train_fold(&cfg, &ds, &plan, 2).unwrap();

        // Rewrite every test document with unseen, frequent words.
        let mut altered = ds.clone();
        for i in plan.test_indices(2) {
            altered.documents[i].text = "novel novel novel words words words".into();
        }
        let other = train_fold(&cfg, &altered, &plan, 2).unwrap();
        assert_eq!(base.encoder.vocab, other.encoder.vocab);
        assert!(!other.encoder.vocab.contains("novel"));
        assert_eq!(base.checkpoint, other.checkpoint);
        assert_eq!(base.result.epochs, other.result.epochs);
    }

    #[test]
    fn divergence_reports_epoch_and_batch() {
        let ds = synthetic::marker_task(20, 7);
        let mut cfg = sanity_config();
        cfg.adam.learning_rate = 1e300;
        let plan = FoldPlan::make(&ds, cfg.seed).unwrap();
        match train_fold(&cfg, &ds, &plan, 0) {
            Err(Error::Diverged { epoch, batch, .. }) => assert!(epoch >= 1 && batch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
