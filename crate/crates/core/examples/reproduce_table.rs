//! Lists the runs behind a result table and compares any finished ones with
//! the published numbers.
//!
//! `cargo run --release --example reproduce_table -- 2 runs`

use std::path::PathBuf;

use contextualizer::cli::cached_report;
use contextualizer::train::{table_grid, Comparison};

fn main() -> contextualizer::Result<()> {
    let mut args = std::env::args().skip(1);
    let table: u8 = args.next().and_then(|t| t.parse().ok()).unwrap_or(2);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs".into()));
    let grid = table_grid(table, 7)?;
    for e in &grid {
        println!(
            "{:<16} contextualizer --out {} cross-validate --dataset {} --K {} --recurrent={} --default-context {}{}",
            e.label,
            out.display(),
            e.config.dataset,
            e.config.steps,
            e.config.recurrent,
            e.config.default_context,
            if e.config.learn_embeddings { " --profile learned" } else { "" }
        );
    }
    let reports: Vec<_> = grid.iter().map(|e| cached_report(&out, &e.config)).collect();
    print!("\n{}", Comparison::new(table, &grid, &reports).render());
    Ok(())
}
