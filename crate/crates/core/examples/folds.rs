//! Stratified folds with a dev slice carved from each training pool.

use contextualizer::data::{FoldPlan, FOLDS};

fn main() -> contextualizer::Result<()> {
    let labels: Vec<bool> = (0..200).map(|i| i % 10 < 3).collect();
    let plan = FoldPlan::from_labels(&labels, 7)?;
    for f in 0..FOLDS {
        let pos = |idx: &[usize]| idx.iter().filter(|&&i| labels[i]).count();
        let (test, dev, train) = (plan.test_indices(f), plan.dev_indices(f), plan.train_indices(f));
        println!(
            "fold {f}: train {} ({} pos), dev {} ({} pos), test {} ({} pos)",
            train.len(),
            pos(&train),
            dev.len(),
            pos(&dev),
            test.len(),
            pos(&test)
        );
    }
    let mut tsv = Vec::new();
    plan.write_manifest(&mut tsv).expect("in-memory write");
    let text = String::from_utf8_lossy(&tsv);
    println!("{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}
