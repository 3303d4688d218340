//! One contextualization step on a toy document, checked against the explicit
//! degree-3 tensor contraction it factorizes.

use contextualizer::model::{candidate_weights, contextualize_step, oracle, AttentionStep};
use contextualizer::tensor::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> contextualizer::Result<()> {
    let (n, m, u) = (4, 3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let step = AttentionStep::glorot(m, u, &mut rng);
    let tokens = Tensor::uniform(&[n, m], -1.0, 1.0, &mut rng);
    let c = vec![1.0; m];

    let (next, alpha) = contextualize_step(&step, &tokens, &c)?;
    println!("alpha (rows = tokens, columns = dimensions):");
    for i in 0..n {
        println!("  {:?}", alpha.row(i).iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>());
    }
    for j in 0..m {
        let s: f64 = (0..n).map(|i| alpha.at(i, j)).sum();
        println!("  column {j} sums to {s:.15}");
    }
    println!("c' = {next:.4?}");

    let dense = oracle::dense_tensor(&step);
    for i in 0..n {
        let fast = candidate_weights(&step, tokens.row(i), &c)?;
        let slow = oracle::contract(&dense, m, tokens.row(i), &c);
        let diff = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("token {i}: factored vs dense max diff {diff:.1e}");
    }
    Ok(())
}
