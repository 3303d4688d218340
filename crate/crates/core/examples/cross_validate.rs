//! Five-fold cross-validation of one configuration on a real corpus.
//!
//! `cargo run --release --example cross_validate -- /path/to/data MR 1`
//! runs the frozen-vector profile with `K = 1` on MR. The data directory
//! defaults to `$CONTEXTUALIZER_DATA`.

use std::path::PathBuf;

use contextualizer::data::{load_dataset, DatasetName, DATA_DIR_ENV};
use contextualizer::train::{run_experiment, ExperimentConfig};

fn main() -> contextualizer::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let root = args
        .next()
        .map(PathBuf::from)
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"));
    let name: DatasetName = args.next().as_deref().unwrap_or("MR").parse()?;
    let steps = args.next().and_then(|k| k.parse().ok()).unwrap_or(1);

    let ds = load_dataset(name, &root)?;
    let cfg = ExperimentConfig {
        steps,
        ..ExperimentConfig::frozen_profile(name)
    };
    let report = run_experiment(&cfg, &ds, |f| {
        println!("fold {}: test {:.4} (best epoch {})", f.fold, f.test_accuracy, f.best_epoch)
    })?;
    println!(
        "{}: {:.2} +/- {:.2} over {} folds",
        report.run_id,
        100.0 * report.mean_test_accuracy,
        100.0 * report.std_test_accuracy,
        report.folds.len()
    );
    print!("{}", report.to_csv());
    Ok(())
}
