//! Trains one fold, saves the best checkpoint, reloads it and scores new
//! sentences.

use contextualizer::data::{synthetic, FoldPlan};
use contextualizer::model::Checkpoint;
use contextualizer::text::tokenize;
use contextualizer::train::{predict, train_fold, ExperimentConfig};

fn main() -> contextualizer::Result<()> {
    let cfg = ExperimentConfig::marker_profile();
    let ds = synthetic::marker_task(40, cfg.seed);
    let plan = FoldPlan::make(&ds, cfg.seed)?;
    let out = train_fold(&cfg, &ds, &plan, 0)?;
    println!("fold 0 test accuracy {:.2}", out.result.test_accuracy);

    let mut bytes = Vec::new();
    out.checkpoint.write_to(&mut bytes)?;
    println!("checkpoint: {} bytes", bytes.len());
    let model = Checkpoint::read_from(bytes.as_slice())?.model;

    let sentences = ["alpha zzmarker bravo", "alpha bravo charlie", "echo echo zzmarker", "unseen words only"];
    let docs = sentences
        .iter()
        .map(|s| out.encoder.encode(&tokenize(s), false))
        .collect::<contextualizer::Result<Vec<_>>>()?;
    for (s, z) in sentences.iter().zip(predict(&model, &docs, 0)?) {
        println!("{s:<24} logit {z:+.3} p(positive) {:.3}", 1.0 / (1.0 + (-z).exp()));
    }
    Ok(())
}
