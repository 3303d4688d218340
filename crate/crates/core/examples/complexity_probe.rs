//! Counts multiply-accumulates of one step as the document grows.
//!
//! `cargo run --release --example complexity_probe -- 520 100`

use contextualizer::model::{count_macs, loglog_slope, probe, Variant};

fn main() -> contextualizer::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (m, u) = (args.first().copied().unwrap_or(520), args.get(1).copied().unwrap_or(100));
    let lengths = [8, 16, 32, 64, 128];
    let rows = probe(m, u, &lengths, 1)?;
    println!("{:>5} {:>14} {:>16} {:>16}", "n", "contextualizer", "token-wise", "pairwise part");
    for r in &rows {
        println!("{:>5} {:>14} {:>16} {:>16}", r.n, r.contextualizer, r.token_wise, r.token_wise_pairwise);
    }
    let pts = |f: fn(&contextualizer::model::ProbeRow) -> u64| -> Vec<(f64, f64)> {
        rows.iter().map(|r| (r.n as f64, f(r) as f64)).collect()
    };
    println!("log-log slope, contextualizer: {:.3}", loglog_slope(&pts(|r| r.contextualizer)));
    println!("log-log slope, token-wise pairwise: {:.3}", loglog_slope(&pts(|r| r.token_wise_pairwise)));
    let n = 1000;
    println!(
        "at n={n}: contextualizer {} MACs, token-wise {} MACs",
        count_macs(m, u, n, Variant::Contextualizer),
        count_macs(m, u, n, Variant::TokenWise)
    );
    Ok(())
}
