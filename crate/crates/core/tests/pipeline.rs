use contextualizer::data::{synthetic, FoldPlan};
use contextualizer::model::{AttentionStep, Checkpoint, ContextualizerModel, DefaultContext, ModelConfig};
use contextualizer::tensor::Tensor;
use contextualizer::text::{tokenize, EncodedDocument};
use contextualizer::train::{accuracy, evaluate, predict, roles, train_fold, ExperimentConfig, Role};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A document made of one repeated vector has `c^(K) = x` for any weights,
/// so the logit is `w·x + b` exactly.
#[test]
fn evaluate_on_fixture_with_known_logits() {
    let config = ModelConfig {
        dim: 3,
        rank: 2,
        steps: 4,
        recurrent: true,
        default_context: DefaultContext::Random,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let step = AttentionStep::glorot(3, 2, &mut rng);
    let model =
        ContextualizerModel::from_parts(config, vec![step], None, Tensor::vector(vec![2.0, 0.0, -1.0]), 0.5).unwrap();
    // logits: 2a - c + 0.5
    let rows = [([1.0, 9.0, 0.0], true), ([-1.0, 4.0, 0.0], false), ([0.0, 0.0, 1.0], true), ([0.0, 1.0, -2.0], false)];
    let docs: Vec<EncodedDocument> = rows
        .iter()
        .enumerate()
        .map(|(i, (x, label))| {
            let data: Vec<f64> = (0..i + 2).flat_map(|_| x.iter().copied()).collect();
            EncodedDocument::from_vectors(Tensor::matrix(i + 2, 3, data).unwrap(), *label).unwrap()
        })
        .collect();
    let logits = predict(&model, &docs, 5).unwrap();
    for (z, want) in logits.iter().zip([2.5, -1.5, -0.5, 2.5]) {
        assert!((z - want).abs() < 1e-12, "{z} vs {want}");
    }
    // hits: doc 0 and doc 1; doc 2 is positive with z < 0, doc 3 negative with z > 0
    assert_eq!(evaluate(&model, &docs, 5).unwrap(), 0.5);
    assert_eq!(accuracy(&logits, &[true, false, false, true]), 1.0);
}

#[test]
fn checkpoint_reproduces_predictions() {
    let ds = synthetic::marker_task(30, 2);
    let cfg = ExperimentConfig {
        epochs: 2,
        default_context: DefaultContext::Learned,
        learn_embeddings: true,
        ..ExperimentConfig::marker_profile()
    };
    let plan = FoldPlan::make(&ds, cfg.seed).unwrap();
    let out = train_fold(&cfg, &ds, &plan, 3).unwrap();

    let mut bytes = Vec::new();
    out.checkpoint.write_to(&mut bytes).unwrap();
    let back = Checkpoint::read_from(bytes.as_slice()).unwrap();
    assert_eq!(back, out.checkpoint);
    let trained = back.embeddings.as_ref().expect("learned embeddings are saved");
    assert_eq!(trained, out.encoder.embeddings.vectors());

    let test: Vec<EncodedDocument> = roles(&plan, 3)
        .iter()
        .zip(&ds.documents)
        .filter(|(r, _)| **r == Role::Test)
        .map(|(_, d)| out.encoder.encode(&tokenize(&d.text), d.label).unwrap())
        .collect();
    assert_eq!(test.len(), out.result.test_documents);
    let a = predict(&out.checkpoint.model, &test, 9).unwrap();
    let b = predict(&back.model, &test, 9).unwrap();
    assert_eq!(a, b);
}
