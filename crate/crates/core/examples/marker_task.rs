//! Cross-validation on a corpus whose label is the presence of one token.

use contextualizer::data::synthetic;
use contextualizer::train::{run_experiment, ExperimentConfig};

fn main() -> contextualizer::Result<()> {
    let cfg = ExperimentConfig::marker_profile();
    let ds = synthetic::marker_task(20, cfg.seed);
    for d in ds.documents.iter().take(4) {
        println!("{} {:?}", u8::from(d.label), d.text);
    }
    let report = run_experiment(&cfg, &ds, |f| {
        println!(
            "fold {}: best epoch {}, dev {:.2}, test {:.2}",
            f.fold, f.best_epoch, f.best_dev_accuracy, f.test_accuracy
        )
    })?;
    println!("mean test accuracy {:.3}", report.mean_test_accuracy);
    Ok(())
}
